"""Absolutely continuous invariant measures and the normalizing conjugacy.

An expanding map ``g`` has a unique invariant density ``theta``.  With
``h(x) = int_0^x theta`` the conjugate ``h o g o h^{-1}`` preserves Lebesgue
measure, i.e. ``sum over preimages of 1/f' = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, PreconditionError
from .maps import ConjugatedMap, DisplacementDiffeo, require_expanding
from .sampled import SampledFunction

DENSITY_GRID = 4096


def _preimages(g, x):
    """Preimages ``(d, len(x))`` of ``x`` under ``g`` and the weights ``1/g'``."""
    d = g.degree
    ys = np.stack([np.asarray(g.inverse_branch(x, np.full(x.shape, b)), float) for b in range(d)])
    ys = np.mod(ys, 1.0)
    w = 1.0 / g.jet(ys.ravel(), 1)[1].reshape(ys.shape)
    return ys, w


@dataclass
class InvariantDensity:
    density: SampledFunction
    iterations: int
    last_change: float
    residual: float    # sup |L theta - theta| on the grid

    def __call__(self, x, nu=0):
        return self.density(x, nu)

    @property
    def values(self):
        return self.density.values


def transfer_operator(g, theta, x=None):
    """``(L theta)(x) = sum_{g(y) = x} theta(y) / g'(y)``."""
    x = theta.grid if x is None else np.asarray(x, float)
    ys, w = _preimages(g, x)
    return (theta(ys) * w).sum(axis=0)


def invariant_density(g, G=DENSITY_GRID, tol=1e-12, max_iter=100_000) -> InvariantDensity:
    """Power iteration of the transfer operator on a periodic cubic spline."""
    require_expanding(g)
    x = np.arange(G) / G
    ys, w = _preimages(g, x)
    vals = np.ones(G)
    change = math.inf
    for it in range(1, max_iter + 1):
        theta = SampledFunction(vals)
        new = (theta(ys) * w).sum(axis=0)
        new /= SampledFunction(new).integral()
        change = float(np.max(np.abs(new - vals)))
        vals = new
        if change < tol:
            break
    else:
        raise NumericalFailure(f"density iteration did not converge (last change {change:.2e})")
    theta = SampledFunction(vals, {"iterations": it})
    if vals.min() <= 0:
        raise NumericalFailure("invariant density is not positive")
    resid = float(np.max(np.abs((theta(ys) * w).sum(axis=0) - vals)))
    return InvariantDensity(theta, it, change, resid)


class _DensityDisplacement:
    """``q(x) = int_0^x theta - x`` from the spline antiderivative, drift removed."""

    def __init__(self, theta: SampledFunction):
        self._anti = theta.antiderivative()
        self._theta = theta
        self._total = float(self._anti(1.0))

    def __call__(self, x, nu=0):
        x = np.asarray(x, float)
        if nu == 0:
            return self._anti(x) / self._total - x
        out = self._theta(x, nu - 1) / self._total
        if nu == 1:
            out = out - 1.0
        return out


def normalizing_conjugacy(g, density=None) -> DisplacementDiffeo:
    """``h(x) = int_0^x theta``, exactly fixing 0 and 1."""
    if density is None:
        density = invariant_density(g)
    theta = density.density if isinstance(density, InvariantDensity) else density
    if np.min(theta.values) <= 0:
        raise PreconditionError("density must be strictly positive")
    return DisplacementDiffeo(_DensityDisplacement(theta), max_order=3, label="normalize")


def normalize_map(g, density=None) -> ConjugatedMap:
    """The Lebesgue-preserving conjugate ``h o g o h^{-1}``."""
    h = normalizing_conjugacy(g, density)
    return ConjugatedMap(g, [h])


def lebesgue_identity_residual(f, n=4096):
    """``sup_x |sum_{f(y)=x} 1/f'(y) - 1|`` on an ``n``-point grid."""
    x = np.arange(n) / n
    _, w = _preimages(f, x)
    return float(np.max(np.abs(w.sum(axis=0) - 1.0)))


@dataclass
class BirkhoffComparison:
    bins: int
    orbits: int
    steps: int
    max_error: float
    l1_error: float     # mean |histogram - expected| over bins, i.e. the L1 distance of densities
    histogram: np.ndarray
    expected: np.ndarray


def birkhoff_histogram(g, bins=8, orbits=10_000, steps=1000, burn_in=32, density=None):
    """Empirical occupation frequencies of forward orbits against bin averages of ``theta``.

    Starting points are the deterministic sequence ``k * (sqrt(5)-1)/2 mod 1``.
    """
    if bins < 1 or orbits < 1 or steps < 1:
        raise PreconditionError("bins, orbits and steps must be positive")
    if density is None:
        density = invariant_density(g)
    theta = density.density if isinstance(density, InvariantDensity) else density
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    x = np.mod(np.arange(1, orbits + 1) * golden, 1.0)
    for _ in range(burn_in):
        x = np.mod(g.jet(x, 0)[0], 1.0)
    counts = np.zeros(bins)
    for _ in range(steps):
        x = np.mod(g.jet(x, 0)[0], 1.0)
        counts += np.bincount(np.minimum((x * bins).astype(int), bins - 1), minlength=bins)
    hist = counts / counts.sum() * bins
    anti = theta.antiderivative()
    edges = np.arange(bins + 1) / bins
    expected = np.diff(anti(edges)) * bins / float(anti(1.0))
    err = np.abs(hist - expected)
    return BirkhoffComparison(bins, orbits, steps, float(err.max()), float(err.mean()),
                              hist, expected)
