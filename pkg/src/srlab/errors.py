"""Exception types shared by the package.

The command line maps :class:`PreconditionError` to exit status 1 and
:class:`NumericalFailure` to exit status 2.
"""


class PreconditionError(ValueError):
    """Input data violates an operation's precondition."""


class BudgetExceeded(PreconditionError):
    """Requested enumeration is larger than the configured budget."""


class AmbiguousMatch(PreconditionError):
    """A correspondence between two point sets or spectra is not unique."""


class NumericalFailure(RuntimeError):
    """An iteration failed to converge or produced invalid output."""


class NotMonotone(NumericalFailure):
    """A circle map that should be a diffeomorphism is not increasing."""


class InductiveViolation(NumericalFailure):
    """An inductive inequality of the reconstruction scheme failed."""

    def __init__(self, message, inequality=None):
        super().__init__(message)
        self.inequality = inequality
