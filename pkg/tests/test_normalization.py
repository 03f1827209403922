import math

import numpy as np
import pytest

from srlab.errors import PreconditionError
from srlab.maps import CircleMapSpec, evaluate
from srlab.normalization import (birkhoff_histogram, invariant_density, lebesgue_identity_residual,
                                 normalize_map, normalizing_conjugacy, transfer_operator)
from srlab.sampled import SampledFunction
from srlab.spectrum import length_spectrum


@pytest.fixture(scope="module")
def f0_density(f0):
    return invariant_density(f0)


@pytest.fixture(scope="module")
def f0_normalized(f0, f0_density):
    return normalize_map(f0, f0_density)


def test_linear_density_is_one(L2):
    th = invariant_density(CircleMapSpec(3))
    assert np.max(np.abs(th.values - 1)) < 1e-14
    assert np.max(np.abs(invariant_density(L2).values - 1)) < 1e-14


def test_f0_density_fixed_point(f0, f0_density):
    assert f0_density.residual < 1e-11
    assert f0_density.density.integral() == pytest.approx(1.0, abs=1e-14)
    x = np.arange(333) / 333
    assert np.max(np.abs(transfer_operator(f0, f0_density.density, x) - f0_density(x))) < 1e-11


def test_normalized_density_is_one(f0_normalized):
    assert np.max(np.abs(invariant_density(f0_normalized).values - 1)) < 1e-10


def test_conjugacy_from_constant_density():
    h = normalizing_conjugacy(None, SampledFunction(np.ones(64)))
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(h(x) - x)) < 1e-15


def test_conjugacy_from_cosine_density():
    theta = SampledFunction.from_callable(lambda x: 1 + 0.1 * np.cos(2 * np.pi * x))
    h = normalizing_conjugacy(None, theta)
    x = np.arange(1000) / 1000
    expected = x + 0.1 / (2 * np.pi) * np.sin(2 * np.pi * x)
    assert np.max(np.abs(h(x) - expected)) < 1e-12
    assert h(1.0) == 1.0 and h(0.0) == 0.0


def test_conjugacy_rejects_nonpositive_density():
    theta = SampledFunction.from_callable(lambda x: 0.5 + np.cos(2 * np.pi * x))
    with pytest.raises(PreconditionError):
        normalizing_conjugacy(None, theta)


def test_identity_residuals(L2, f0, f0_normalized):
    assert lebesgue_identity_residual(L2) == 0.0
    assert lebesgue_identity_residual(f0) > 1e-3
    assert lebesgue_identity_residual(f0_normalized) < 1e-8


def test_idempotence(f0_normalized):
    twice = normalize_map(f0_normalized)
    x = np.arange(4096) / 4096
    assert np.max(np.abs(evaluate(twice, x) - evaluate(f0_normalized, x))) < 1e-8


def test_density_rate_is_stable():
    # the second harmonic is the lowest one that moves the density at first order for d = 2
    ratios = []
    for delta in (1e-2, 1e-3, 1e-4):
        th = invariant_density(CircleMapSpec(2, (0.0, delta)))
        ratios.append(np.max(np.abs(th.values - 1)) / delta)
    assert max(ratios) / min(ratios) < 1.02


def test_spectrum_preserved(f0, f0_normalized):
    a, b = length_spectrum(f0, 8), length_spectrum(f0_normalized, 8)
    for n in range(1, 9):
        assert np.max(np.abs(a.levels[n] - b.levels[n])) < 1e-9


def test_small_birkhoff(f0, f0_density):
    cmp = birkhoff_histogram(f0, bins=4, orbits=1000, steps=500, density=f0_density)
    assert cmp.l1_error < 1e-2
    assert cmp.histogram.mean() == pytest.approx(1.0)  # bin averages of a density
