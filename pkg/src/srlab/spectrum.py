"""Length spectra, (beta, gamma)-sparsity and marking recovery."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousMatch, PreconditionError
from .maps import validate_expanding
from .orbits import ALPHABET, enumerate_batch


def _code_values(codes, d):
    n = codes.shape[1]
    w = np.array([d ** (n - 1 - j) for j in range(n)], dtype=np.int64)
    return codes @ w


def _word(v, d, n):
    out = []
    for _ in range(n):
        out.append(ALPHABET[v % d])
        v //= d
    return "".join(reversed(out))


@dataclass
class LengthSpectrum:
    """Per-level sorted log-multipliers with code annotations.

    ``by_code[n][v]`` is the log-multiplier of the code whose base-``d``
    value is ``v``.
    """

    degree: int
    levels: dict
    by_code: dict
    sorted_codes: dict
    Lambda: float
    Omega: float
    derivative_lipschitz: float
    label: str = ""

    @property
    def max_level(self):
        return max(self.levels) if self.levels else 0

    def values(self, n):
        return self.levels[n]

    def value_of(self, code):
        n = len(code)
        v = int(code, self.degree) if self.degree <= 10 else int(code, 36)
        return float(self.by_code[n][v])

    def pooled(self):
        return np.concatenate([self.levels[n] for n in sorted(self.levels)])

    def write_csv(self, path_or_file):
        def _write(fh):
            w = csv.writer(fh)
            w.writerow(["level", "value", "code"])
            for n in sorted(self.levels):
                for val, v in zip(self.levels[n], self.sorted_codes[n]):
                    w.writerow([n, f"{val:.17g}", _word(int(v), self.degree, n)])

        if hasattr(path_or_file, "write"):
            _write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                _write(fh)


def length_spectrum(map_, N) -> LengthSpectrum:
    if int(N) != N or N < 1:
        raise PreconditionError("max level must be a positive integer")
    rep = validate_expanding(map_)
    if not rep.expanding:
        raise PreconditionError("map is not expanding")
    d = map_.degree
    levels, by_code, sorted_codes = {}, {}, {}
    for n in range(1, int(N) + 1):
        b = enumerate_batch(map_, n)
        vals = _code_values(b.codes, d)
        table = np.empty(d ** n - 1)
        table[vals] = b.log_multipliers
        order = np.argsort(b.log_multipliers, kind="stable")
        levels[n] = b.log_multipliers[order]
        sorted_codes[n] = vals[order]
        by_code[n] = table
    return LengthSpectrum(d, levels, by_code, sorted_codes, rep.lambda_lower, rep.omega_upper,
                          rep.derivative_lipschitz, str(getattr(map_, "label", "")))


# ---------------------------------------------------------------------------
# sparsity


@dataclass(frozen=True)
class SparsityParams:
    beta: float
    gamma: float
    cbeta: float = 1.0
    cgamma: float = 1.0

    def __post_init__(self):
        for name in ("beta", "gamma", "cbeta", "cgamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise PreconditionError(f"{name} must be positive, got {v!r}")
        if not self.beta < self.gamma:
            raise PreconditionError(f"need beta < gamma, got beta={self.beta}, gamma={self.gamma}")


def default_sparsity_parameters(d):
    """``(beta0, gamma0, a0)`` with ``a0 = log((3d-1)/2) / log((d+1)/2)``."""
    if int(d) != d or d < 2:
        raise PreconditionError("degree must be an integer >= 2")
    a0 = math.log((3 * d - 1) / 2) / math.log((d + 1) / 2)
    beta0 = 1.0 / (120.0 * (a0 + 1.0) * a0 ** 2)
    return beta0, 1.0 / 3.0, a0


@dataclass
class SparsityVerdict:
    satisfied: bool
    n_pairs: int
    n_far: int
    n_close: int
    n_violations: int
    witness: tuple | None
    cbeta_feasible: float
    cgamma_needed: float

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def sparsity_classify(spec, params: SparsityParams, chunk=2048) -> SparsityVerdict:
    """Classify every pair of stored entries as FAR, CLOSE or a violation.

    ``cbeta_feasible`` is the largest ``C_beta`` for which every pair that is
    not CLOSE is FAR; ``cgamma_needed`` is the smallest ``C_gamma`` for which
    every pair that is not FAR is CLOSE.
    """
    v = np.sort(spec.pooled() if isinstance(spec, LengthSpectrum) else np.asarray(spec, float))
    M = v.size
    far = close = viol = 0
    witness = None
    cb_feas = math.inf
    cg_need = 0.0
    b, g = params.beta, params.gamma
    for start in range(0, M, chunk):
        lo = v[start:start + chunk]
        i = np.arange(start, min(start + chunk, M))
        # pairs (i, j) with j > i
        for offset in range(start, M, chunk):
            hi = v[offset:offset + chunk]
            j = np.arange(offset, min(offset + chunk, M))
            mask = j[None, :] > i[:, None]
            if not mask.any():
                continue
            delta = hi[None, :] - lo[:, None]
            is_far = delta >= params.cbeta * np.exp(-b * hi[None, :])
            is_close = delta <= params.cgamma * np.exp(-g * lo[:, None])
            is_far &= mask
            is_close &= mask
            bad = mask & ~is_far & ~is_close
            far += int(is_far.sum())
            close += int((is_close & ~is_far).sum())
            nb = int(bad.sum())
            if nb and witness is None:
                r, c = np.argwhere(bad)[0]
                witness = (float(lo[r]), float(hi[c]))
            viol += nb
            not_close = mask & ~is_close
            if not_close.any():
                cb_feas = min(cb_feas, float((delta * np.exp(b * hi[None, :]))[not_close].min()))
            not_far = mask & ~is_far
            if not_far.any():
                cg_need = max(cg_need, float((delta * np.exp(g * lo[:, None]))[not_far].max()))
    return SparsityVerdict(viol == 0, M * (M - 1) // 2, far, close, viol, witness, cb_feas, cg_need)


# ---------------------------------------------------------------------------
# marking recovery


@dataclass
class MarkingRow:
    code: str
    lambda_f: float
    lambda_g: float
    discrepancy: float


@dataclass
class MarkingTable:
    rows: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    recovered_up_to: int = 0
    requested_depth: float = 0
    kappa0: float = 1
    proximity_constant: float = 0.0
    code_consistent: bool = True
    truncated: bool = False
    oracle_assisted: bool = False

    def periods(self):
        return sorted(self.rows)

    def max_discrepancy(self, k=None):
        ks = [k] if k is not None else self.periods()
        vals = [r.discrepancy for kk in ks for r in self.rows.get(kk, [])]
        return max(vals) if vals else 0.0

    def within_thresholds(self):
        return all(r.discrepancy <= self.thresholds[k] * (1 + 1e-9) + 1e-14
                   for k, rows in self.rows.items() for r in rows)


def marking_depth(delta1, params, eta, a, Lambda):
    """``N = floor(-(1/(eta*beta*a)) * log(delta1)/log(Lambda))``."""
    if delta1 <= 0:
        return math.inf
    raw = -(1.0 / (eta * params.beta * a)) * math.log(delta1) / math.log(Lambda)
    return int(math.floor(raw + 1e-9))


def proximity_constant(Lambda, lip_f, lip_g):
    """Constant K with ``|lambda_f - lambda_g| <= K * k * ||f - g||_{C^1}``."""
    return (min(lip_f, lip_g) / (Lambda - 1.0) + 1.0) / Lambda


def starting_scale(params, eta, Omega, K, k_max=10 ** 8):
    """Smallest ``k`` with ``log k + b k log Omega - log C_b + log K < eta b k log Omega``."""
    lo = 1
    step = 1024
    lw = math.log(Omega)
    while lo <= k_max:
        k = np.arange(lo, lo + step, dtype=float)
        lhs = np.log(k) + params.beta * k * lw - math.log(params.cbeta) + math.log(K)
        hit = np.flatnonzero(lhs < eta * params.beta * k * lw)
        if hit.size:
            return int(k[hit[0]])
        lo += step
        step = min(step * 2, 1 << 22)
    return math.inf


def recover_marking(spec_f: LengthSpectrum, spec_g: LengthSpectrum, delta1, params: SparsityParams,
                    eta=2.0, kappa0=None, strict=False) -> MarkingTable:
    """Match log-multipliers of ``f`` to clusters of ``g`` period by period."""
    if not eta > 1:
        raise PreconditionError("eta must exceed 1")
    if delta1 < 0:
        raise PreconditionError("delta1 must be non-negative")
    if spec_f.degree != spec_g.degree:
        raise PreconditionError("spectra come from maps of different degree")
    d = spec_f.degree
    Lam = min(spec_f.Lambda, spec_g.Lambda)
    Om = max(spec_f.Omega, spec_g.Omega)
    a = max(1.0, math.log(Om) / math.log(Lam))
    K = proximity_constant(Lam, spec_f.derivative_lipschitz, spec_g.derivative_lipschitz)
    N = marking_depth(delta1, params, eta, a, Lam)
    k0 = starting_scale(params, eta, Om, K) if kappa0 is None else int(kappa0)
    avail = min(spec_f.max_level, spec_g.max_level)
    if strict and N > avail:
        raise PreconditionError(f"spectra reach level {avail}, marking depth is {N}")
    top = int(min(N, avail))
    table = MarkingTable(requested_depth=N, kappa0=k0, proximity_constant=K,
                         truncated=N > avail)
    if k0 == math.inf or top < k0:
        table.recovered_up_to = 0
        return table
    for k in range(int(k0), top + 1):
        window = K * k * delta1
        link = params.cgamma * Lam ** (-params.gamma * k)
        gv = spec_g.levels[k]
        # clusters: maximal chains with consecutive gaps <= link
        breaks = np.flatnonzero(np.diff(gv) > link)
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [gv.size - 1]])
        c_lo, c_hi = gv[starts], gv[ends]
        fv = spec_f.levels[k]
        fc = spec_f.sorted_codes[k]
        first = np.searchsorted(c_hi, fv - window, side="left")
        last = np.searchsorted(c_lo, fv + window, side="right") - 1
        count = last - first + 1
        if np.any(count > 1):
            i = int(np.flatnonzero(count > 1)[0])
            raise AmbiguousMatch(
                f"period {k}: entry {fv[i]:.12g} is within {window:.3g} of {count[i]} clusters")
        if np.any(count < 1):
            i = int(np.flatnonzero(count < 1)[0])
            raise AmbiguousMatch(f"period {k}: entry {fv[i]:.12g} has no partner within {window:.3g}")
        lg = spec_g.by_code[k][fc]
        cluster_of_code = np.searchsorted(starts, np.searchsorted(gv, lg, side="left"), side="right") - 1
        if np.any(cluster_of_code != first):
            table.code_consistent = False
        table.rows[k] = [MarkingRow(_word(int(v), d, k), float(x), float(y), float(abs(x - y)))
                         for v, x, y in zip(fc, fv, lg)]
        table.thresholds[k] = window
    table.recovered_up_to = top
    return table


def code_marking(spec_f: LengthSpectrum, spec_g: LengthSpectrum, periods):
    """Marking by identical codes; used when spectra are too shallow for recovery."""
    table = MarkingTable(oracle_assisted=True)
    d = spec_f.degree
    for k in periods:
        lf, lg = spec_f.by_code[k], spec_g.by_code[k]
        table.rows[k] = [MarkingRow(_word(v, d, k), float(lf[v]), float(lg[v]), float(abs(lf[v] - lg[v])))
                         for v in range(lf.size)]
        table.thresholds[k] = math.inf
    table.recovered_up_to = max(periods) if periods else 0
    return table
