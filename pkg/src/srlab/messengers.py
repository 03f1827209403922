"""Messenger and hybrid-messenger periodic orbits.

A (p, q)-messenger from ``x-`` to ``x+`` (periodic points with codes of
common length n) has code ``sigma-^p sigma+^q``: it follows ``x-`` for ``pn``
steps and then ``x+`` for ``qn`` steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .maps import validate_expanding
from .orbits import SymbolicCode, circle_gaps, enumerate_batch, gap_constant, locate, locate_each


def _circ(a, b):
    t = np.abs(np.asarray(a, float) - np.asarray(b, float)) % 1.0
    return np.minimum(t, 1.0 - t)


def _position(point, word, d):
    # the all-(d-1) word sits at the right end of [0, 1]
    return 1.0 if all(s == d - 1 for s in word) else point


@dataclass
class MessengerSpec:
    code_minus: str
    code_plus: str
    p: int
    q: int
    code: str
    x_minus: float
    x_plus: float
    y_minus: float
    y_plus: float
    ell: float
    t_minus: float
    t_plus: float
    bounds_minus: tuple
    bounds_plus: tuple
    closeness_constant: float
    degenerate: bool
    between: bool
    expansion_bounds_ok: bool

    @property
    def period(self):
        return len(self.code)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _two_sided(ell, L_near, L_far, c):
    """Bounds on the closest approach from the image-length inequalities."""
    denom = L_near * L_far - 1.0
    lower = ell * (L_far / c - 1.0) / denom
    upper = ell * (c * L_far - 1.0) / denom
    return max(lower, 0.0), upper


def messenger(map_, code_minus, code_plus, p, q, gaps=None) -> MessengerSpec:
    """Locate the (p, q)-messenger and compare it with the expansion estimates.

    ``bounds_minus`` / ``bounds_plus`` are the two-sided bounds on ``t-`` and
    ``t+`` obtained with the distortion constant ``c = exp(Lip(g')/(Lambda-1))``.
    ``closeness_constant`` is the smallest ``C`` with
    ``C^-1 ell o_n^p <= t- <= C ell O_n^p`` (and the same for ``t+`` with q).
    """
    d = map_.degree
    sm = SymbolicCode.parse(code_minus, d)
    sp = SymbolicCode.parse(code_plus, d)
    if sm.period != sp.period:
        raise PreconditionError("messenger endpoints need codes of the same period")
    if int(p) != p or int(q) != q or p < 1 or q < 1:
        raise PreconditionError("p and q must be positive integers")
    p, q, n = int(p), int(q), sm.period
    word = sm * p + sp * q
    rot = sp * q + sm * p
    ends = locate(map_, [sm, sp])
    ys = locate(map_, [word, rot])
    xm = _position(ends.points[0], sm.word, d)
    xp = _position(ends.points[1], sp.word, d)
    ym, yp = ys.points
    lam_m, lam_p = ends.log_multipliers
    ell = abs(xp - xm)
    tm, tp = abs(xm - ym), abs(xp - yp)
    lo_x, hi_x = min(xm, xp), max(xm, xp)
    between = bool(lo_x - 1e-15 <= ym <= hi_x + 1e-15 and lo_x - 1e-15 <= yp <= hi_x + 1e-15)
    degenerate = ell < 1e-15
    rep = validate_expanding(map_)
    c = math.exp(rep.derivative_lipschitz / (rep.lambda_lower - 1.0))
    Lm, Lp = math.exp(p * lam_m), math.exp(q * lam_p)
    if degenerate:
        bm = bp = (0.0, 0.0)
        ok = tm < 1e-12 and tp < 1e-12
        C = 1.0
    else:
        bm = _two_sided(ell, Lm, Lp, c)
        bp = _two_sided(ell, Lp, Lm, c)
        tol = 1e-12
        ok = bool(between and bm[0] - tol <= tm <= bm[1] + tol and bp[0] - tol <= tp <= bp[1] + tol)
        if gaps is None:
            g = circle_gaps(enumerate_batch(map_, n).points)
            gaps = (g.min(), g.max())
        o, O = gaps
        C = max(tm / (ell * O ** p), ell * o ** p / tm, tp / (ell * O ** q), ell * o ** q / tp)
    return MessengerSpec(str(sm), str(sp), p, q, str(word), float(xm), float(xp), float(ym),
                         float(yp), float(ell), float(tm), float(tp), bm, bp, float(C),
                         bool(degenerate), between, bool(ok))


# ---------------------------------------------------------------------------
# hybrid messengers


def _check_hybrid(map_, code_i, t, p):
    d = map_.degree
    s = SymbolicCode.parse(code_i, d)
    n = s.period
    if int(t) != t or int(p) != p or p < 1:
        raise PreconditionError("t and p must be integers, p >= 1")
    t = int(t)
    # x_i = 0 is allowed with any t: everything collapses onto the fixed point
    if not 1 <= t < n and not (t >= 0 and not any(s.word)):
        raise PreconditionError(f"shift t must satisfy 1 <= t < n = {n}, got {t}")
    return s, n, t, int(p)


@dataclass
class PseudoOrbit:
    points: np.ndarray
    segments: tuple       # lengths of the three segments
    jumps: np.ndarray     # distance between the image of each point and the next point
    seam_jumps: tuple

    @property
    def max_jump(self):
        return float(self.jumps.max()) if self.jumps.size else 0.0


def pseudo_orbit(map_, code_i, t, p) -> PseudoOrbit:
    """Messenger half toward ``x_i``, ``t`` steps of ``x_i``, returning messenger half.

    The three pieces are exact orbit segments; the jumps are at the seams.
    """
    s, n, t, p = _check_hybrid(map_, code_i, t, p)
    zero = SymbolicCode((0,) * n)
    sj = s.shift(t)
    ym_i = zero * p + s * p          # messenger from 0 to x_i
    yp_j = sj * p + zero * p         # image of the messenger from 0 to x_j
    o1, o2, o3 = (r.orbit for r in locate_each(map_, [ym_i, s, yp_j]))
    pts = np.concatenate([o1[: p * n], o2[np.arange(t) % n], o3[: p * n]])
    # successor of each point along its own orbit
    nxt = np.concatenate([o1[1: p * n + 1], o2[np.arange(1, t + 1) % n], o3[1: p * n + 1]])
    target = np.roll(pts, -1)
    jumps = _circ(nxt, target)
    seams = (float(jumps[p * n - 1]), float(jumps[p * n + t - 1]), float(jumps[-1]))
    return PseudoOrbit(pts, (p * n, t, p * n), jumps, seams)


@dataclass
class HybridMessengerSpec:
    code_i: str
    t: int
    p: int
    code: str
    z_minus: float
    z_zero: float
    z_plus: float
    deviation: float
    scale: float          # Lambda^{-n p}
    constant: float       # deviation / scale
    bound_constant: float
    within_bound: bool
    max_jump: float

    @property
    def period(self):
        return len(self.code)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def hybrid_code(code_i, t, p, d=2):
    s = SymbolicCode.parse(code_i, d)
    n = s.period
    zero = SymbolicCode((0,) * n)
    head = SymbolicCode(s.word[:t])
    return zero * p + head + s.shift(t) * p


def hybrid_messenger(map_, code_i, t, p, C=None) -> HybridMessengerSpec:
    """Locate the hybrid messenger and its distance to the pseudo-orbit.

    ``C`` defaults to ``c * N_g`` (distortion constant times the gap constant);
    the empirical ratio ``deviation * Lambda^{np}`` is reported as ``constant``.
    """
    s, n, t, p = _check_hybrid(map_, code_i, t, p)
    code = hybrid_code(s, t, p, map_.degree)
    batch = locate(map_, [code])
    orbit = batch.orbits[0]
    po = pseudo_orbit(map_, s, t, p)
    dev = float(_circ(orbit, po.points).max())
    rep = validate_expanding(map_)
    scale = rep.lambda_lower ** (-n * p)
    if C is None:
        C = math.exp(rep.derivative_lipschitz / (rep.lambda_lower - 1.0)) * gap_constant(rep)
    return HybridMessengerSpec(
        str(s), t, p, str(code), float(orbit[0]), float(orbit[p * n]),
        float(orbit[(p * n + t) % len(orbit)]), dev, scale, dev / scale, float(C),
        bool(dev <= C * scale), po.max_jump)


@dataclass
class MessengerSurvey:
    """Expansion estimates over all ordered pairs of distinct period-``n`` points."""

    n: int
    p: int
    q: int
    pairs: int
    expansion_bounds_ok: bool
    between_ok: bool
    max_constant: float
    worst_pair: tuple = field(default=None)


def messenger_survey(map_, n, p, q) -> MessengerSurvey:
    """Vectorized :func:`messenger` over every ordered pair of period-``n`` codes."""
    d = map_.degree
    base = enumerate_batch(map_, n)
    codes, pts, lam = base.codes, base.points, base.log_multipliers
    M = pts.size
    if M < 2:
        # a single point admits no pair: nothing to check
        return MessengerSurvey(n, p, q, 0, True, True, 0.0, None)
    i, j = np.nonzero(~np.eye(M, dtype=bool))
    cm, cp = codes[i], codes[j]
    word = np.concatenate([np.tile(cm, (1, p)), np.tile(cp, (1, q))], axis=1)
    rot = np.concatenate([np.tile(cp, (1, q)), np.tile(cm, (1, p))], axis=1)
    ym = locate(map_, word).points
    yp = locate(map_, rot).points
    xm, xp = pts[i], pts[j]
    ell = np.abs(xp - xm)
    tm, tp = np.abs(xm - ym), np.abs(xp - yp)
    lo, hi = np.minimum(xm, xp), np.maximum(xm, xp)
    between = (ym >= lo - 1e-15) & (ym <= hi + 1e-15) & (yp >= lo - 1e-15) & (yp <= hi + 1e-15)
    rep = validate_expanding(map_)
    c = math.exp(rep.derivative_lipschitz / (rep.lambda_lower - 1.0))
    Lm, Lp = np.exp(p * lam[i]), np.exp(q * lam[j])
    denom = Lm * Lp - 1.0
    tol = 1e-12
    ok_m = (tm >= np.maximum(ell * (Lp / c - 1.0) / denom, 0) - tol) & (tm <= ell * (c * Lp - 1.0) / denom + tol)
    ok_p = (tp >= np.maximum(ell * (Lm / c - 1.0) / denom, 0) - tol) & (tp <= ell * (c * Lm - 1.0) / denom + tol)
    g = circle_gaps(pts)
    o, O = g.min(), g.max()
    C = np.maximum.reduce([tm / (ell * O ** p), ell * o ** p / tm, tp / (ell * O ** q), ell * o ** q / tp])
    w = int(np.argmax(C))
    worst = ("".join(str(s) for s in cm[w]), "".join(str(s) for s in cp[w]))
    return MessengerSurvey(n, p, q, int(i.size), bool(np.all(ok_m & ok_p)), bool(np.all(between)),
                           float(C.max()), worst)
