"""Cohomological equations from periodic data.

Given ``D`` on the circle we look for ``u`` with ``D = u o g - u``.  Sums of
a coboundary over periodic orbits vanish; conversely, small orbit sums force
``D`` to be close to a coboundary.  The candidate ``u`` is the barrier
function ``u(x) = sum_{s >= 1} (D(g0^{-s} x) - D(0))`` along the inverse
branch ``g0^{-1}`` fixing 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import PreconditionError
from .maps import validate_expanding
from .orbits import all_codes, circle_gaps, enumerate_batch, locate
from .sampled import SampledFunction, derivative_sup

FINE_GRID = 1 << 14


def periodic_obstruction(g, D, m):
    """``max |sum_{s<m} D(g^s x)|`` over the period-``m`` points of ``g``."""
    orbits = enumerate_batch(g, m).orbits
    return float(np.max(np.abs(D(orbits).sum(axis=1))))


def _tail_bound(g, D, S):
    rep = validate_expanding(g)
    lam = rep.lambda_lower
    return derivative_sup(D) * lam ** (-S) / (lam - 1.0)


def barrier_values(g, D, x, S):
    """Truncated barrier function at the points ``x`` (in ``[0, 1)``)."""
    if int(S) != S or S < 1:
        raise PreconditionError("truncation S must be a positive integer")
    y = np.asarray(x, float).copy()
    d0 = float(D(np.array([0.0]))[0])
    u = np.zeros_like(y)
    for _ in range(int(S)):
        y = np.asarray(g.inverse_branch(y, np.zeros(y.shape, dtype=int)), float)
        u += D(y) - d0
    return u


def barrier_function(g, D, S, G=4096) -> SampledFunction:
    """Barrier function sampled on a uniform grid of size ``G``.

    ``meta['tail_bound']`` bounds the neglected terms and ``meta['u0']`` is the
    value at 0.
    """
    x = np.arange(G) / G
    u = barrier_values(g, D, x, S)
    return SampledFunction(u, {"tail_bound": _tail_bound(g, D, S), "u0": float(u[0]),
                               "truncation": int(S)})


def coboundary_residual(g, D, u, n=FINE_GRID):
    """``sup |D - u o g + u|`` on an ``n``-point grid."""
    x = np.arange(n) / n
    gx = np.mod(np.asarray(g.jet(x, 0)[0], float), 1.0)
    return float(np.max(np.abs(D(x) - u(gx) + u(x))))


def default_truncation(g, tol=1e-14):
    lam = validate_expanding(g).lambda_lower
    return int(math.ceil(math.log(tol) / math.log(1.0 / lam))) + 2


# ---------------------------------------------------------------------------
# finite-data pipeline


def messenger_family(d, n):
    """Codes of the (2,2)-messengers from 0 to each period-``n`` point and of the
    hybrid (2,2)-messengers through ``x`` and ``g(x)``: periods ``4n`` and ``4n+1``."""
    codes = all_codes(d, n)
    zero = np.zeros((codes.shape[0], 2 * n), dtype=np.int64)
    four = np.concatenate([zero, codes, codes], axis=1)
    if n >= 2:
        shifted = np.roll(codes, -1, axis=1)
        five = np.concatenate([zero, codes[:, :1], shifted, shifted], axis=1)
    else:
        five = np.concatenate([zero, codes[:, :1], codes, codes], axis=1)
    return four, five


def messenger_obstruction(g, D, n):
    """Largest orbit sum of ``D`` over the messenger family at periods ``4n``, ``4n+1``."""
    four, five = messenger_family(g.degree, n)
    out = {}
    for codes in (four, five):
        b = locate(g, codes)
        out[codes.shape[1]] = float(np.max(np.abs(D(b.orbits).sum(axis=1))))
    return out


@dataclass
class NormDescriptor:
    """Regularity of ``D``: ``kind`` is ``'lipschitz'`` or ``'holder'``."""

    kind: str = "lipschitz"
    seminorm: float | None = None
    alpha: float = 1.0

    def scale(self, O):
        if self.kind == "lipschitz":
            return self.seminorm * O
        if self.kind == "holder":
            return self.seminorm * O ** self.alpha
        raise PreconditionError(f"unknown norm descriptor {self.kind!r}")


@dataclass
class LivsicReport:
    n: int
    nodes: int
    residual: float
    o: float
    O: float
    derivative_norm: float
    obstruction: dict
    obstruction_constant: float   # max obstruction / (O^2 ||D'||)
    residual_constant: float      # residual / (O ||D'||) or its Hoelder analogue
    rhs_scale: float
    interpolant: object = field(repr=False, default=None)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "interpolant"}


def livsic_from_periodic_data(g, D, n, S=None, descriptor=None) -> LivsicReport:
    """Barrier function on the period-``n`` points, extended by periodic cubic interpolation.

    The residual ``sup |D - u o g + u|`` of the extension is compared with
    ``O_n * ||D'||`` (or ``seminorm * O_n^alpha`` for a Hoelder descriptor).
    """
    if S is None:
        S = default_truncation(g)
    pts = np.sort(enumerate_batch(g, n).points)
    u_nodes = barrier_values(g, D, pts, S)
    if pts.size >= 3:
        spline = CubicSpline(np.append(pts, 1.0), np.append(u_nodes, u_nodes[0]), bc_type="periodic")
        u = lambda x, _s=spline: _s(np.mod(x, 1.0))
    else:
        u = lambda x, _c=float(u_nodes.mean()): np.full(np.shape(x), _c)
    gaps = circle_gaps(pts)
    o, O = float(gaps.min()), float(gaps.max())
    dn = derivative_sup(D)
    desc = descriptor or NormDescriptor("lipschitz", dn)
    if desc.seminorm is None:
        desc = NormDescriptor(desc.kind, dn, desc.alpha)
    res = coboundary_residual(g, D, u)
    obs = messenger_obstruction(g, D, n)
    rhs = desc.scale(O)
    return LivsicReport(n, int(pts.size), res, o, O, dn, obs,
                        max(obs.values()) / (O ** 2 * dn) if dn > 0 else 0.0,
                        res / rhs if rhs > 0 else 0.0, rhs, u)


def fit_decay_rate(ns, values):
    """Slope of ``-log(values)`` against ``ns`` by least squares."""
    ns = np.asarray(ns, float)
    v = np.log(np.asarray(values, float))
    A = np.vstack([ns, np.ones_like(ns)]).T
    slope, _ = np.linalg.lstsq(A, v, rcond=None)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# derivative transfer


@dataclass
class DerivativeTransferReport:
    n: int
    value: float                 # sup |f'(phi x) - g'(x)| over the sampled points
    bound_scale: float           # Lambda^{-alpha^2 n/(a+1)}
    ratio: float
    marking_discrepancy: float   # largest |lambda_f - lambda_g| on periods 4n, 4n+1
    marking_scale: float
    marking_ok: bool
    lebesgue_residuals: tuple


def derivative_transfer_check(f, g, n, marking=None, depth=12, alpha=1.0, sigma=None,
                              marking_constant=1.0) -> DerivativeTransferReport:
    """Compare ``f' o phi`` with ``g'`` on the conjugacy-oracle samples.

    Both maps must preserve Lebesgue measure.  The marking hypothesis is
    checked on the messenger family of periods ``4n`` and ``4n+1`` (or on a
    supplied :class:`~srlab.spectrum.MarkingTable`, which must cover both
    periods); it is reported, not enforced, so failures of the implication
    stay visible.
    """
    from .normalization import lebesgue_identity_residual
    from .reconstruction import conjugacy_oracle

    rf, rg = lebesgue_identity_residual(f), lebesgue_identity_residual(g)
    if rf > 1e-8 or rg > 1e-8:
        raise PreconditionError(
            f"maps must preserve Lebesgue measure (identity residuals {rf:.2e}, {rg:.2e})")
    rep_f, rep_g = validate_expanding(f), validate_expanding(g)
    lam = min(rep_f.lambda_lower, rep_g.lambda_lower)
    a = max(1.0, math.log(max(rep_f.omega_upper, rep_g.omega_upper)) / math.log(lam))
    if sigma is None:
        sigma = 2.0 * alpha ** 2 / (a + 1.0)
    if marking is not None:
        missing = [k for k in (4 * n, 4 * n + 1) if k not in marking.rows]
        if missing:
            raise PreconditionError(f"marking insufficient: periods {missing} not covered")
        disc = max(marking.max_discrepancy(4 * n), marking.max_discrepancy(4 * n + 1))
    else:
        disc = 0.0
        for codes in messenger_family(g.degree, n):
            lf = locate(f, codes).log_multipliers
            lg = locate(g, codes).log_multipliers
            disc = max(disc, float(np.max(np.abs(lf - lg))))
    mscale = marking_constant * lam ** (-sigma * n)
    oracle = conjugacy_oracle(f, g, depth)
    fp = f.jet(oracle.nodes_f, 1)[1]
    gp = g.jet(oracle.nodes_g, 1)[1]
    value = float(np.max(np.abs(fp - gp)))
    scale = lam ** (-alpha ** 2 * n / (a + 1.0))
    return DerivativeTransferReport(n, value, scale, value / scale, disc, mscale,
                                    bool(disc <= mscale), (rf, rg))


@dataclass
class DerivativeTransferScan:
    reports: list
    fitted_exponent: float     # decay rate of the value per unit n
    required_exponent: float   # alpha^2/(a+1) * log Lambda


def derivative_transfer_scan(family, g, ns, alpha=1.0, depth=12, **kw) -> DerivativeTransferScan:
    """:func:`derivative_transfer_check` for ``f = family(n)`` over ``ns`` with a log-linear fit."""
    reps = [derivative_transfer_check(family(n), g, n, depth=depth, alpha=alpha, **kw) for n in ns]
    rg = validate_expanding(g)
    lam = rg.lambda_lower
    a = max(1.0, math.log(rg.omega_upper) / math.log(lam))
    rate = fit_decay_rate([r.n for r in reps], [max(r.value, 1e-300) for r in reps])
    return DerivativeTransferScan(reps, rate, alpha ** 2 / (a + 1.0) * math.log(lam))
