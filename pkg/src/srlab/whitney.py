"""Smooth extension of a finite order-preserving correspondence on the circle.

The displacement ``h - id`` is interpolated at the nodes by a periodic spline
of odd degree ``2r+1``; its size is controlled by the divided differences of
the node data.  With too few nodes for that spline a low-order trigonometric
interpolant is used instead, which keeps every derivative available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import NotMonotone, PreconditionError
from .maps import DisplacementDiffeo, MonotoneNodeDiffeo, TrigPolynomial
from .orbits import circle_gaps

NORM_GRID = 1 << 14


@dataclass
class DividedDifferenceReport:
    """``D[j] = max_i |Delta^j h[x_i .. x_{i+j}]|`` over cyclic windows, ``j = 1..m``."""

    D: dict
    windows: int

    def __getitem__(self, j):
        return self.D[j]


def _check_nodes(nodes):
    x = np.asarray(nodes, float).reshape(-1)
    if x.size < 2:
        raise PreconditionError("need at least two nodes")
    if np.any(x < 0) or np.any(x >= 1):
        raise PreconditionError("nodes must lie in [0, 1)")
    steps = np.diff(x)
    if np.any(steps == 0):
        raise PreconditionError("duplicate nodes")
    if np.any(steps < 0):
        raise PreconditionError("nodes must be strictly increasing")
    return x


def divided_differences(nodes, values, m, lift_degree=1, cyclic=True) -> DividedDifferenceReport:
    """Divided differences of orders ``1..m`` over all cyclic windows.

    With ``cyclic=False`` only windows inside ``[nodes[0], nodes[-1]]`` count.
    Going once around the circle adds 1 to the nodes and ``lift_degree`` to
    the values (1 for a degree-one lift such as ``h``, 0 for a periodic
    function such as ``h - id``).
    """
    x = _check_nodes(nodes)
    y = np.asarray(values, float).reshape(-1)
    s = x.size
    if y.size != s:
        raise PreconditionError("nodes and values differ in length")
    if not 1 <= m < s + 1:
        raise PreconditionError(f"order m must satisfy 1 <= m <= {s}")
    starts = np.arange(s) if cyclic else np.arange(s - m)
    if starts.size == 0:
        raise PreconditionError("no window of the requested order")
    idx = starts[:, None] + np.arange(m + 1)[None, :]
    wraps = idx // s
    X = x[idx % s] + wraps
    table = y[idx % s] + lift_degree * wraps
    out = {}
    for j in range(1, m + 1):
        table = (table[:, 1:] - table[:, :-1]) / (X[:, j:] - X[:, :-j])
        out[j] = float(np.max(np.abs(table[:, 0])))
    return DividedDifferenceReport(out, int(starts.size))


def sampled_norms(q, jmax, n=NORM_GRID):
    """``||q||_{C^{j-1,1}}`` for ``j = 1..jmax``: grid maxima of ``q^(i)``, ``i < j``,
    and a finite-difference Lipschitz constant of ``q^(j-1)``."""
    x = np.arange(n + 1) / n
    sups, lips = [], []
    for i in range(jmax):
        v = np.asarray(q(np.mod(x, 1.0), i), float)
        sups.append(float(np.max(np.abs(v))))
        lips.append(float(np.max(np.abs(np.diff(v))) * n))
    return {j: max(max(sups[:j]), lips[j - 1]) for j in range(1, jmax + 1)}


class _SplineDisplacement:
    def __init__(self, spline):
        self.spline = spline

    def __call__(self, x, nu=0):
        return self.spline(np.mod(np.asarray(x, float), 1.0), nu)


def _trig_interpolant(xs, q):
    """Minimum-norm trigonometric polynomial through ``(xs[i], q[i])``; ``xs[0] = 0``.

    Uses harmonics ``1..s-1`` with coefficients weighted by ``j^2`` so low
    frequencies are preferred.
    """
    s = xs.size
    j = np.arange(1, s)
    w = 1.0 / j.astype(float) ** 2
    ang = 2 * np.pi * xs[1:, None] * j[None, :]
    M = np.hstack([np.sin(ang) * w, (np.cos(ang) - 1.0) * w])
    c = np.linalg.lstsq(M, q[1:], rcond=None)[0]
    m = s - 1
    return TrigPolynomial(tuple(c[:m] * w), tuple(c[m:] * w))


class _ZeroDisplacement:
    def __call__(self, x, nu=0):
        return np.zeros(np.shape(x))


@dataclass
class WhitneyResult:
    h: object
    degree: int
    downgraded: bool
    A: float                    # max | |gap_target| - |gap_source| |
    o: float                    # smallest source gap
    norms: dict                 # j -> ||h - id||_{C^{j-1,1}}
    divided: dict               # j -> D_j(h - id) on the nodes
    divided_bounds: dict          # j -> 2^j/j! * A / o^j
    interpolation_error: float
    min_derivative: float
    notes: list = field(default_factory=list)

    @property
    def whitney_ratios(self):
        """Empirical extension constants ``||h - id||_{C^{j-1,1}} / D_j``."""
        return {j: (self.norms[j] / self.divided[j] if self.divided[j] > 0 else 0.0)
                for j in self.norms}

    @property
    def divided_within_bounds(self):
        return all(self.divided[j] <= self.divided_bounds[j] * (1 + 1e-9) + 1e-15
                   for j in self.divided)


def extend_correspondence(source, target, r=1) -> WhitneyResult:
    """Diffeomorphism ``h`` with ``h(source[i]) = target[i]``.

    Both node lists must be increasing in ``[0, 1)`` and start at 0.  The
    spline degree drops to the largest odd degree the node count supports;
    if the spline is not monotone the monotone cubic interpolant is used and
    ``downgraded`` is set.
    """
    xs = _check_nodes(source)
    ys = _check_nodes(target)
    if xs.size != ys.size:
        raise PreconditionError("node lists differ in length")
    if xs[0] != 0.0 or ys[0] != 0.0:
        raise PreconditionError("both node lists must contain 0 as their first element")
    if int(r) != r or r < 0:
        raise PreconditionError("smoothness r must be a non-negative integer")
    r = int(r)
    q = ys - xs
    gx, gy = circle_gaps(xs), circle_gaps(ys)
    A = float(np.max(np.abs(gy - gx)))
    o = float(gx.min())
    s = xs.size
    degree = 2 * r + 1
    notes = []
    downgraded = False
    if np.all(q == 0):
        disp = _ZeroDisplacement()
    elif degree >= s:
        # degree 0 marks the trigonometric interpolant
        degree = 0
        notes.append(f"{s} nodes: trigonometric interpolation instead of a degree-{2 * r + 1} spline")
        disp = _trig_interpolant(xs, q)
    else:
        spline = make_interp_spline(np.append(xs, 1.0), np.append(q, q[0]), k=degree,
                                    bc_type="periodic")
        disp = _SplineDisplacement(spline)
    h = DisplacementDiffeo(disp, max_order=degree if degree else None, label="whitney")
    grid = np.arange(NORM_GRID) / NORM_GRID
    hp = 1.0 + disp(grid, 1)
    if not np.all(hp > 0):
        notes.append(f"spline extension not monotone (min h' {hp.min():.3e}); "
                     "using monotone cubic interpolation")
        h = MonotoneNodeDiffeo(xs, ys, label="whitney-monotone")
        downgraded = True
        hp = h.jet(grid, 1)[1]
        if not np.all(hp > 0):
            raise NotMonotone("monotone fallback failed: correspondence too wild")

        def disp(x, nu=0, _h=h):
            J = _h.jet(np.asarray(x, float).reshape(-1), max(nu, 0))
            v = J[nu].copy()
            if nu == 0:
                v -= x
            elif nu == 1:
                v -= 1.0
            return v

    jmax = min(r + 1, 3 if downgraded else (degree or r + 1))
    norms = sampled_norms(disp, jmax)
    mdd = min(jmax, s - 1) if s > 1 else 0
    divided = divided_differences(xs, q, mdd, lift_degree=0).D if mdd >= 1 else {}
    bounds = {j: 2.0 ** j / math.factorial(j) * A / o ** j for j in divided}
    err = float(np.max(np.abs(np.asarray(h(xs), float) - ys)))
    return WhitneyResult(h, degree, downgraded, A, o, norms, divided, bounds, err,
                         float(hp.min()), notes)
