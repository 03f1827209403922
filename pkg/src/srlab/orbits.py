"""Periodic points from symbolic codes, enumeration, gaps and distortion.

Symbols index the fundamental intervals cut out by the preimages of 0, so a
code ``s_0 ... s_{n-1}`` names the point ``x`` with ``f^j(x)`` in interval
``s_j``.  Such a point is the fixed point of the contraction obtained by
composing inverse branches; we iterate that composition and finish with one
Newton step on the fixed-point equation.
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import config
from .config import check_budget
from .errors import NumericalFailure, PreconditionError
from .maps import CircleMapSpec, ConjugatedMap, validate_expanding

ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"


# ---------------------------------------------------------------------------
# codes


@dataclass(frozen=True)
class SymbolicCode:
    word: tuple

    def __post_init__(self):
        if len(self.word) == 0:
            raise PreconditionError("symbolic code must be nonempty")

    @classmethod
    def parse(cls, code, d=None):
        if isinstance(code, SymbolicCode):
            word = code.word
        elif isinstance(code, str):
            try:
                word = tuple(ALPHABET.index(c) for c in code.strip().lower())
            except ValueError:
                raise PreconditionError(f"invalid symbol in code {code!r}") from None
        else:
            word = tuple(int(s) for s in code)
        obj = cls(word)
        if d is not None and any(s < 0 or s >= d for s in word):
            raise PreconditionError(f"code {obj} has symbols outside 0..{d - 1}")
        return obj

    @property
    def period(self):
        return len(self.word)

    def __str__(self):
        return "".join(ALPHABET[s] for s in self.word)

    def shift(self, k=1):
        k %= self.period
        return SymbolicCode(self.word[k:] + self.word[:k])

    def complement(self, d):
        return SymbolicCode(tuple(d - 1 - s for s in self.word))

    def value(self, d):
        v = 0
        for s in self.word:
            v = v * d + s
        return v

    def __add__(self, other):
        return SymbolicCode(self.word + SymbolicCode.parse(other).word)

    def __mul__(self, k):
        return SymbolicCode(self.word * int(k))


def code_str(code):
    return str(SymbolicCode.parse(code))


def all_codes(d, n):
    """Every word of length ``n`` except the all-``(d-1)`` word, as a matrix.

    Row ``v`` holds the base-``d`` digits of ``v``, most significant first.
    """
    count = d ** n - 1
    v = np.arange(count, dtype=np.int64)
    digits = np.empty((count, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        digits[:, j] = v % d
        v //= d
    return digits


def _codes_matrix(codes, d):
    words = [SymbolicCode.parse(c, d).word for c in codes]
    n = {len(w) for w in words}
    if len(n) != 1:
        raise PreconditionError("codes in one batch must share a period")
    return np.array(words, dtype=np.int64).reshape(len(words), n.pop())


# ---------------------------------------------------------------------------
# location


@dataclass(frozen=True)
class OrbitBatch:
    """Located periodic points for a batch of codes of common period."""

    codes: np.ndarray          # (M, n) integer symbols
    points: np.ndarray         # (M,)
    log_multipliers: np.ndarray
    residuals: np.ndarray
    orbits: np.ndarray         # (M, n): f^j of each point

    @property
    def period(self):
        return self.codes.shape[1]


def _expansion(map_):
    rep = validate_expanding(map_.base)
    if not rep.expanding:
        raise PreconditionError(f"{map_.base}: not expanding (min derivative {rep.Lambda:.6g})")
    return rep


@functools.lru_cache(maxsize=64)
def _lambda_of(spec: CircleMapSpec):
    return _expansion(spec).lambda_lower


def _pull_back_pass(spec, codes, z, guess=None):
    """One application of the composed inverse branches; returns orbit and derivative logs."""
    n = codes.shape[1]
    orbit = np.empty((codes.shape[0], n))
    x = z
    for j in range(n - 1, -1, -1):
        x = spec.inverse_branch(x, codes[:, j], None if guess is None else guess[:, j])
        orbit[:, j] = x
    logs = np.log(spec.jet(orbit.ravel(), 1)[1]).reshape(orbit.shape)
    return orbit, logs


PARALLEL_MIN_ROWS = 8192


def _locate_base(spec: CircleMapSpec, codes: np.ndarray):
    workers = config.threads()
    if workers > 1 and codes.shape[0] >= PARALLEL_MIN_ROWS:
        from concurrent.futures import ThreadPoolExecutor

        parts = np.array_split(codes, workers)
        with ThreadPoolExecutor(workers) as ex:
            done = list(ex.map(lambda c: _locate_rows(spec, c), parts))
        return OrbitBatch(codes, *(np.concatenate([getattr(b, name) for b in done])
                                   for name in ("points", "log_multipliers", "residuals", "orbits")))
    return _locate_rows(spec, codes)


def _locate_rows(spec: CircleMapSpec, codes: np.ndarray):
    d = spec.degree
    M, n = codes.shape
    Lam = _lambda_of(spec)
    passes = math.ceil(math.log(1e-14) / math.log(1.0 / Lam) / n) + 5
    # start from the point of the linear map with the same code
    weights = float(d) ** np.arange(n - 1, -1, -1)
    top = float(d) ** n - 1.0
    z = (codes @ weights) / top
    z = np.minimum(z, 1.0)
    orbit = None
    for _ in range(passes):
        orbit, _ = _pull_back_pass(spec, codes, z, orbit)
        z = orbit[:, 0]
    # Newton on z = Phi(z), Phi' = 1/(f^n)'
    orbit, logs = _pull_back_pass(spec, codes, z, orbit)
    total = logs.sum(axis=1)
    with np.errstate(over="ignore"):
        z = z + (orbit[:, 0] - z) / (1.0 - np.exp(-total))
    z = np.clip(z, 0.0, 1.0)
    orbit, logs = _pull_back_pass(spec, codes, z, orbit)
    resid = np.abs(orbit[:, 0] - z)
    pts = orbit[:, 0]
    # the all-(d-1) word lands on 1, which is the fixed point 0
    top_word = np.all(codes == d - 1, axis=1)
    pts = np.where(top_word, 0.0, pts)
    orbit = np.where(orbit >= 1.0, orbit - 1.0, orbit)
    if not np.all(np.isfinite(pts)):
        raise NumericalFailure("periodic point location produced non-finite values")
    return OrbitBatch(codes, pts, logs.sum(axis=1), resid, orbit)


def _pin_fixed_point(codes, pts, orbit, d):
    # conjugacies fix 0 exactly; rounding in H must not move the fixed point
    zero = np.all(codes == 0, axis=1) | np.all(codes == d - 1, axis=1)
    pts = np.where(zero | ((pts < 0) & (pts > -1e-12)), 0.0, pts)
    orbit = np.where(zero[:, None], 0.0, orbit)
    pts = np.where(pts >= 1.0, pts - 1.0, pts)
    orbit = np.where(orbit >= 1.0, orbit - 1.0, orbit)
    orbit = np.where(orbit < 0.0, orbit + 1.0, orbit)
    return pts, orbit


def locate(map_, codes):
    """Locate the periodic points of a batch of codes (matrix or list of codes)."""
    d = map_.degree
    if isinstance(codes, np.ndarray) and codes.ndim == 2 and codes.dtype.kind in "iu":
        mat = codes.astype(np.int64)
        if mat.size and (mat.min() < 0 or mat.max() >= d):
            raise PreconditionError("symbols out of range")
    else:
        mat = _codes_matrix(codes, d)
    check_budget(mat.shape[0], mat.shape[1], "periodic point location")
    if isinstance(map_, ConjugatedMap):
        base = _locate_base(map_.base, mat)
        H = map_.conjugacy
        if H.is_identity:
            return base
        pts = np.asarray(H(base.points), float).reshape(-1)
        orbit = np.asarray(H(base.orbits.ravel()), float).reshape(base.orbits.shape)
        pts, orbit = _pin_fixed_point(mat, pts, orbit, d)
        return OrbitBatch(mat, pts, base.log_multipliers, base.residuals, orbit)
    if not isinstance(map_, CircleMapSpec):
        raise PreconditionError("expected a CircleMapSpec or ConjugatedMap")
    return _locate_base(map_, mat)


@dataclass(frozen=True)
class LocatedOrbit:
    point: float
    log_multiplier: float
    residual: float
    orbit: np.ndarray


def locate_each(map_, codes):
    """Like :func:`locate` for codes of mixed periods; one result per code."""
    words = [SymbolicCode.parse(c, map_.degree) for c in codes]
    out = [None] * len(words)
    by_len = {}
    for i, w in enumerate(words):
        by_len.setdefault(w.period, []).append(i)
    for _, idx in sorted(by_len.items()):
        b = locate(map_, [words[i] for i in idx])
        for row, i in enumerate(idx):
            out[i] = LocatedOrbit(float(b.points[row]), float(b.log_multipliers[row]),
                                  float(b.residuals[row]), b.orbits[row])
    return out


@dataclass(frozen=True)
class PeriodicOrbitRecord:
    code: str
    point: float
    period: int
    log_multiplier: float
    residual: float


def _records(batch):
    return [
        PeriodicOrbitRecord("".join(ALPHABET[s] for s in row), float(p), batch.period,
                            float(l), float(r))
        for row, p, l, r in zip(batch.codes, batch.points, batch.log_multipliers, batch.residuals)
    ]


def periodic_point_from_code(map_, code) -> PeriodicOrbitRecord:
    """The periodic point with itinerary ``code`` (read cyclically)."""
    return _records(locate(map_, [code]))[0]


@functools.lru_cache(maxsize=128)
def _enumerate_base(spec: CircleMapSpec, n: int):
    batch = _locate_base(spec, all_codes(spec.degree, n))
    order = np.argsort(batch.points, kind="stable")
    return OrbitBatch(batch.codes[order], batch.points[order], batch.log_multipliers[order],
                      batch.residuals[order], batch.orbits[order])


def enumerate_batch(map_, n) -> OrbitBatch:
    """All ``d^n - 1`` points of period ``n`` (not necessarily minimal), sorted by point."""
    if int(n) != n or n < 1:
        raise PreconditionError("period must be a positive integer")
    n = int(n)
    d = map_.degree
    check_budget(d ** n - 1, n, "enumeration")
    if isinstance(map_, ConjugatedMap):
        base = _enumerate_base(map_.base, n)
        H = map_.conjugacy
        if H.is_identity:
            return base
        pts = np.asarray(H(base.points), float).reshape(-1)
        orbit = np.asarray(H(base.orbits.ravel()), float).reshape(base.orbits.shape)
        pts, orbit = _pin_fixed_point(base.codes, pts, orbit, d)
        return OrbitBatch(base.codes, pts, base.log_multipliers, base.residuals, orbit)
    return _enumerate_base(map_, n)


def is_primitive(word):
    n = len(word)
    return all(tuple(word[k:] + word[:k]) != tuple(word) for k in range(1, n) if n % k == 0)


def enumerate_periodic(map_, n, primitive_only=False):
    """Records for every periodic point of period ``n``, sorted by point."""
    recs = _records(enumerate_batch(map_, n))
    if primitive_only:
        recs = [r for r in recs if is_primitive(tuple(r.code))]
    return recs


def write_orbits_csv(records, path_or_file):
    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["code", "point", "period", "log_multiplier", "residual"])
        for r in records:
            w.writerow([r.code, f"{r.point:.17g}", r.period, f"{r.log_multiplier:.17g}",
                        f"{r.residual:.3e}"])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


# ---------------------------------------------------------------------------
# gaps


def circle_gaps(points):
    """Gaps between consecutive points of a finite subset of the circle."""
    p = np.sort(np.mod(np.asarray(points, float), 1.0))
    if p.size == 1:
        return np.array([1.0])
    return np.append(np.diff(p), 1.0 - p[-1] + p[0])


@dataclass
class GapStats:
    period: int
    o: float
    O: float
    N_g: float
    lower_bound: float
    upper_bound: float
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self):
        return self.lower_ok and self.upper_ok


def gap_constant(rep):
    """``(Omega/Lambda) * exp(Lip(f')/(Lambda - 1))`` from a validity report."""
    return (rep.omega_upper / rep.lambda_lower) * math.exp(
        rep.derivative_lipschitz / (rep.lambda_lower - 1.0))


def gap_statistics(map_, n) -> GapStats:
    rep = validate_expanding(map_)
    if not rep.expanding:
        raise PreconditionError("map is not expanding")
    gaps = circle_gaps(enumerate_batch(map_, n).points)
    o, O = float(gaps.min()), float(gaps.max())
    Ng = gap_constant(rep)
    lower = 1.0 / (Ng * rep.omega_upper ** n - 1.0)
    denom = rep.lambda_lower ** n / Ng - 1.0
    upper = 1.0 / denom if denom > 0 else math.inf
    slack = 1e-12
    return GapStats(n, o, O, Ng, lower, upper, o >= lower - slack, O <= upper + slack)


# ---------------------------------------------------------------------------
# distortion


def cylinder(map_, code):
    """Interval of points whose itinerary starts with ``code``."""
    word = SymbolicCode.parse(code, map_.degree).word
    ends = np.array([0.0, 1.0])
    for s in reversed(word):
        ends = np.asarray(map_.inverse_branch(ends, np.array([s, s])), float)
    return float(ends[0]), float(ends[1])


def _lift_orbit(map_, x, n):
    x = np.asarray(x, float)
    logs = np.zeros_like(x)
    for _ in range(n):
        J = map_.jet(x, 1)
        logs += np.log(J[1])
        x = J[0]
    return x, logs


@dataclass
class DistortionReport:
    ratio: float
    bound: float
    image_length: float
    ok: bool


def distortion_check(map_, interval, n, samples=2001) -> DistortionReport:
    """Sampled ``max (f^n)'(y)/(f^n)'(z)`` on ``interval`` against the distortion bound."""
    a, b = (float(v) for v in interval)
    if not b > a:
        raise PreconditionError("interval must have positive length")
    rep = validate_expanding(map_)
    if not rep.expanding:
        raise PreconditionError("map is not expanding")
    ends, _ = _lift_orbit(map_, np.array([a, b]), n)
    J = float(ends[1] - ends[0])
    if J > 1.0 + 1e-12:
        raise PreconditionError(
            f"f^{n} is not injective on [{a}, {b}] (image length {J:.6g} > 1)")
    x = np.linspace(a, b, samples)
    _, logs = _lift_orbit(map_, x, n)
    ratio = float(np.exp(logs.max() - logs.min()))
    bound = math.exp(rep.derivative_lipschitz / (rep.lambda_lower - 1.0) * J)
    return DistortionReport(ratio, bound, J, ratio <= bound * (1 + 1e-12))
