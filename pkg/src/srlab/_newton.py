"""Vectorized safeguarded Newton iteration for increasing functions."""
import numpy as np

from .errors import NumericalFailure

EPS = np.finfo(float).eps


def solve_increasing(fun, target, lo, hi, x0=None, tol=1e-15, max_iter=200):
    """Solve ``fun(x) = target`` elementwise for an increasing ``fun``.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, derivative)`` on 1-D arrays.
    target, lo, hi : array_like
        Right-hand sides and brackets with ``fun(lo) <= target <= fun(hi)``.
    x0 : array_like, optional
        Starting guesses, clipped into the bracket. Defaults to the midpoint.
    tol : float
        Residual tolerance, relative to ``1 + |target|``.

    Returns
    -------
    ndarray
        Roots, same shape as the broadcast inputs.

    Newton steps that leave the current bracket are replaced by bisection.
    """
    target, lo, hi = np.broadcast_arrays(
        np.asarray(target, float), np.asarray(lo, float), np.asarray(hi, float))
    shape = target.shape
    target = target.ravel().copy()
    lo = lo.ravel().copy()
    hi = hi.ravel().copy()
    if x0 is None:
        x = 0.5 * (lo + hi)
    else:
        x = np.broadcast_to(np.asarray(x0, float), shape).ravel().copy()
        x = np.clip(x, lo, hi)
    thresh = tol * (1.0 + np.abs(target))
    active = np.arange(x.size)
    for _ in range(max_iter):
        if active.size == 0:
            return x.reshape(shape)
        xa = x[active]
        v, dv = fun(xa)
        r = np.asarray(v, float) - target[active]
        ok = np.abs(r) <= thresh[active]
        below = r < 0
        lo[active[below]] = xa[below]
        hi[active[~below]] = xa[~below]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xa - r / dv
        la, ha = lo[active], hi[active]
        bad = ~((step > la) & (step < ha)) | ~np.isfinite(step)
        step[bad] = 0.5 * (la[bad] + ha[bad])
        stalled = (np.abs(step - xa) <= 2 * EPS * np.maximum(1.0, np.abs(xa))) | \
            (ha - la <= 2 * EPS * np.maximum(1.0, np.abs(xa)))
        x[active] = np.where(ok, xa, step)
        active = active[~(ok | stalled)]
    if active.size:
        raise NumericalFailure(
            f"Newton iteration did not converge for {active.size} points after {max_iter} iterations")
    return x.reshape(shape)
