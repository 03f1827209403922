import math

import numpy as np
import pytest

from srlab.counterexample import build_pair
from srlab.errors import PreconditionError
from srlab.livsic import (NormDescriptor, barrier_function, barrier_values, coboundary_residual,
                          default_truncation, derivative_transfer_check, fit_decay_rate,
                          livsic_from_periodic_data, messenger_family, messenger_obstruction,
                          periodic_obstruction)
from srlab.maps import CircleMapSpec, evaluate
from srlab.normalization import normalize_map
from srlab.sampled import SampledFunction


def _v(x):
    x = np.asarray(x, float)
    return 0.05 * np.sin(2 * np.pi * x) + 0.02 * np.cos(4 * np.pi * x)


@pytest.fixture(scope="module")
def cob(f0):
    """An exact coboundary ``v o f0 - v`` sampled on the default grid."""
    return SampledFunction.from_callable(lambda x: _v(evaluate(f0, x)) - _v(x))


def _const(c):
    return lambda x: np.full(np.shape(x), float(c))


def test_obstruction_of_coboundary(f0, cob):
    for m in range(1, 9):
        assert periodic_obstruction(f0, cob, m) < 1e-8


def test_obstruction_constant(f0):
    for m in (1, 2, 5):
        assert periodic_obstruction(f0, _const(-0.3), m) == pytest.approx(m * 0.3, rel=1e-14)


def test_obstruction_linear_sine(L2):
    D = lambda x: np.sin(2 * np.pi * np.asarray(x))
    assert periodic_obstruction(L2, D, 2) < 1e-14


def test_barrier_zero(f0):
    u = barrier_function(f0, _const(0.0), 10, G=64)
    assert np.all(u.values == 0)


def test_barrier_telescopes_to_v(f0, cob):
    S = default_truncation(f0)
    u = barrier_function(f0, cob, S)
    x = np.arange(997) / 997
    err = np.max(np.abs(u(x) - (_v(x) - _v(0.0))))
    assert err < 1e-8
    assert u.meta["tail_bound"] < 1e-13


def test_barrier_linear_identity(L2):
    u = barrier_values(L2, lambda x: np.asarray(x, float), np.array([0.1]), 60)
    assert u[0] == pytest.approx(0.1, abs=1e-15)


def test_barrier_rejects_bad_truncation(f0):
    with pytest.raises(PreconditionError):
        barrier_values(f0, _const(1.0), np.array([0.1]), 0)


def test_linearity(f0):
    D1 = SampledFunction.from_callable(lambda x: np.sin(2 * np.pi * x), 512)
    D2 = SampledFunction.from_callable(lambda x: np.cos(6 * np.pi * x) - 1, 512)
    S = 30
    u1, u2 = barrier_function(f0, D1, S, 512), barrier_function(f0, D2, S, 512)
    u = barrier_function(f0, 0.7 * D1 + (-1.3) * D2, S, 512)
    assert np.max(np.abs(u.values - (0.7 * u1.values - 1.3 * u2.values))) < 1e-10


def test_residual_coboundary(f0, cob):
    u = barrier_function(f0, cob, default_truncation(f0))
    assert coboundary_residual(f0, cob, u) < 1e-6


def test_residual_constant(f0):
    c = 0.25
    u = barrier_function(f0, _const(c), 20, 256)
    assert coboundary_residual(f0, _const(c), u) == pytest.approx(c, abs=1e-14)


def test_default_truncation(f0, L2):
    assert default_truncation(f0) == math.ceil(math.log(1e-14) / math.log(1 / (2 - 0.1 * math.pi))) + 2
    assert default_truncation(L2) == math.ceil(math.log(1e-14) / math.log(0.5)) + 2


def test_messenger_family_shapes():
    four, five = messenger_family(2, 3)
    assert four.shape == (7, 12) and five.shape == (7, 13)
    assert np.all(four[:, :6] == 0)


def test_messenger_obstruction_keys(f0, cob):
    obs = messenger_obstruction(f0, cob, 2)
    assert set(obs) == {8, 9} and max(obs.values()) < 1e-8


def test_periodic_data_pipeline_decays(f0, cob):
    reps = [livsic_from_periodic_data(f0, cob, n) for n in range(4, 8)]
    assert all(r.obstruction_constant < 1e-6 for r in reps)
    rate = fit_decay_rate([r.n for r in reps], [r.residual for r in reps])
    assert rate >= 0.9 * math.log(2 - 0.1 * math.pi)


def test_holder_descriptor():
    d = NormDescriptor("holder", 2.0, 0.5)
    assert d.scale(0.04) == pytest.approx(0.4)
    with pytest.raises(PreconditionError):
        NormDescriptor("sobolev", 1.0).scale(0.1)


def test_fit_decay_rate_exact():
    ns = np.arange(4, 10)
    assert fit_decay_rate(ns, 3.0 * np.exp(-0.7 * ns)) == pytest.approx(0.7, abs=1e-12)


@pytest.fixture(scope="module")
def g_norm(f0):
    return normalize_map(f0)


def test_branch_identity_on_normalized(g_norm):
    from srlab.normalization import lebesgue_identity_residual
    assert lebesgue_identity_residual(g_norm) < 1e-10


def test_derivative_transfer_identical(g_norm):
    r = derivative_transfer_check(g_norm, g_norm, 3, depth=8)
    assert r.value == 0.0 and r.marking_ok


def test_derivative_transfer_requires_normalized(f0, g_norm):
    with pytest.raises(PreconditionError):
        derivative_transfer_check(f0, g_norm, 3, depth=8)


def test_derivative_transfer_marking_coverage(g_norm):
    from srlab.spectrum import code_marking, length_spectrum
    s = length_spectrum(g_norm, 9)
    with pytest.raises(PreconditionError):
        derivative_transfer_check(g_norm, g_norm, 2, marking=code_marking(s, s, [8]), depth=8)
    r = derivative_transfer_check(g_norm, g_norm, 2, marking=code_marking(s, s, [8, 9]), depth=8)
    assert r.marking_discrepancy == 0.0


def test_derivative_transfer_counterexample_reported():
    f, g = build_pair(0.1)
    r = derivative_transfer_check(normalize_map(f), normalize_map(g), 3, depth=10)
    assert not r.marking_ok
    assert r.value > 0.3


def test_derivative_transfer_scan_decays(g_norm):
    from srlab.livsic import derivative_transfer_scan
    from srlab.maps import validate_expanding
    lam = validate_expanding(CircleMapSpec(2, (), (-0.01,))).lambda_lower
    g = normalize_map(CircleMapSpec(2, (), (-0.01,)))
    family = lambda n: normalize_map(CircleMapSpec(2, (0.5 * lam ** -n,), (-0.01,)))
    scan = derivative_transfer_scan(family, g, range(4, 9), depth=10)
    assert scan.fitted_exponent >= scan.required_exponent
    values = [r.value for r in scan.reports]
    assert all(b < a for a, b in zip(values, values[1:]))
