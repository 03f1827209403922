"""Input checks shared by the estimator wrappers and the command line."""
import numpy as np

from .errors import PreconditionError
from .maps import CircleMapSpec, ConjugatedMap


def check_map(m, name="map"):
    if not isinstance(m, (CircleMapSpec, ConjugatedMap)):
        raise PreconditionError(f"{name} must be a CircleMapSpec or ConjugatedMap, got {type(m).__name__}")
    return m


def check_points(x, name="x"):
    """1-D finite float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise PreconditionError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name} contains non-finite values")
    return arr


def check_circle_nodes(x, name="nodes"):
    arr = check_points(x, name)
    if arr.size and (arr.min() < 0 or arr.max() >= 1):
        raise PreconditionError(f"{name} must lie in [0, 1)")
    return arr


def check_positive_int(v, name):
    if int(v) != v or v < 1:
        raise PreconditionError(f"{name} must be a positive integer, got {v!r}")
    return int(v)
