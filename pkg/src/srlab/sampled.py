"""Periodic functions sampled on a uniform grid."""
from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import PreconditionError


class SampledFunction:
    """1-periodic function known at ``x_i = i/G``, interpolated by a periodic cubic spline.

    Instances are callable as ``F(x)`` or ``F(x, nu)`` for the ``nu``-th
    derivative.  ``meta`` carries free-form diagnostics (for example the
    truncation bound of a barrier function).
    """

    def __init__(self, values, meta=None):
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.size < 4:
            raise PreconditionError("need at least 4 samples")
        if not np.all(np.isfinite(values)):
            raise PreconditionError("samples must be finite")
        self.values = values
        self.G = values.size
        self.meta = dict(meta or {})
        x = np.arange(self.G + 1) / self.G
        self._spline = CubicSpline(x, np.append(values, values[0]), bc_type="periodic")

    @classmethod
    def from_callable(cls, fn, G=4096, meta=None):
        return cls(fn(np.arange(G) / G), meta)

    @property
    def grid(self):
        return np.arange(self.G) / self.G

    def __call__(self, x, nu=0):
        x = np.mod(np.asarray(x, float), 1.0)
        return self._spline(x, nu)

    def derivative(self, x, nu=1):
        return self(x, nu)

    def sup(self, nu=0, n=1 << 14):
        return float(np.max(np.abs(self(np.arange(n) / n, nu))))

    def lipschitz(self, n=1 << 14):
        return self.sup(1, n)

    def antiderivative(self):
        """Piecewise-polynomial antiderivative vanishing at 0 (not periodic in general)."""
        return self._spline.antiderivative()

    def integral(self):
        return float(self._spline.integrate(0.0, 1.0))

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            if other.G != self.G:
                raise PreconditionError("grids differ")
            return SampledFunction(self.values + other.values)
        return SampledFunction(self.values + float(other))

    def __mul__(self, c):
        return SampledFunction(self.values * float(c))

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other


def derivative_sup(fn, n=1 << 14):
    """``sup |fn'|``: exact for :class:`SampledFunction`, central differences otherwise."""
    if isinstance(fn, SampledFunction):
        return fn.lipschitz(n)
    x = np.arange(n) / n
    h = 1e-6
    return float(np.max(np.abs(fn(x + h) - fn(x - h)) / (2 * h)))
