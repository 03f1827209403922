"""An iso-spectral pair that is not conjugate by an orientation-preserving smooth map.

``f(x) = 2x + eps sin^2(pi x)`` and ``g(x) = -f(-x) = 2x - eps sin^2(pi x)``
are conjugate by ``x -> -x``, so their length spectra agree level by level.
The reflection reverses orientation and swaps the symbols 0 and 1, so the
periodic points with the same code generally have different multipliers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .maps import sine_squared_map, validate_expanding
from .spectrum import length_spectrum, _word


@dataclass(frozen=True)
class CounterexamplePair:
    f: object
    g: object
    epsilon: float
    degenerate: bool   # eps = 0 gives f = g = the doubling map

    def __iter__(self):
        return iter((self.f, self.g))


def build_pair(epsilon) -> CounterexamplePair:
    eps = float(epsilon)
    if not math.isfinite(eps):
        raise PreconditionError("epsilon must be finite")
    if abs(eps) * math.pi >= 1.0:
        raise PreconditionError(
            f"epsilon = {eps:g}: minimum derivative 2 - |eps| pi = {2 - abs(eps) * math.pi:.4g} "
            "is not above 1")
    f = sine_squared_map(eps, label=f"2x+{eps:g}sin^2")
    g = sine_squared_map(-eps, label=f"2x-{eps:g}sin^2")
    for m in (f, g):
        if not validate_expanding(m).expanding:
            raise PreconditionError(f"{m.label} is not expanding")
    return CounterexamplePair(f, g, eps, eps == 0.0)


@dataclass
class IsospectralReport:
    isospectral: bool
    tol: float
    per_level: dict   # n -> max |sorted lambda_f - sorted lambda_g|

    @property
    def max_distance(self):
        return max(self.per_level.values()) if self.per_level else 0.0


def verify_isospectral(f, g, N, tol=1e-9) -> IsospectralReport:
    """Compare the sorted log-multipliers of ``f`` and ``g`` at each level ``n <= N``."""
    if f.degree != g.degree:
        raise PreconditionError("maps have different degrees")
    sf, sg = length_spectrum(f, N), length_spectrum(g, N)
    per = {n: float(np.max(np.abs(sf.levels[n] - sg.levels[n]))) for n in range(1, N + 1)}
    return IsospectralReport(all(v < tol for v in per.values()), tol, per)


@dataclass(frozen=True)
class MismatchRow:
    code: str
    code_g: str
    lambda_f: float
    lambda_g: float
    discrepancy: float


def complement_index(v, d, n):
    """Index of the complemented word; the all-``(d-1)`` word is identified with ``0...0``."""
    top = d ** n - 1
    return (top - np.asarray(v)) % top


def find_multiplier_mismatch(f, g, N, tol=1e-6, marking="identity"):
    """Codes up to period ``N`` whose log-multipliers differ under the given marking.

    ``marking='identity'`` pairs equal codes (the orientation-preserving
    marking); ``'opposite'`` pairs each code with its complement (the
    marking induced by the reflection).  Sorted by decreasing discrepancy.
    """
    if marking not in ("identity", "opposite"):
        raise PreconditionError("marking must be 'identity' or 'opposite'")
    d = f.degree
    sf, sg = length_spectrum(f, N), length_spectrum(g, N)
    rows = []
    for n in range(1, N + 1):
        lf = sf.by_code[n]
        idx = np.arange(lf.size)
        partner = idx if marking == "identity" else complement_index(idx, d, n)
        lg = sg.by_code[n][partner]
        diff = np.abs(lf - lg)
        for i in np.flatnonzero(diff > tol):
            rows.append(MismatchRow(_word(int(i), d, n), _word(int(partner[i]), d, n),
                                    float(lf[i]), float(lg[i]), float(diff[i])))
    rows.sort(key=lambda r: (-r.discrepancy, len(r.code), r.code))
    return rows
