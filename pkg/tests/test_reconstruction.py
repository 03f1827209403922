import math

import numpy as np
import pytest

from srlab.counterexample import build_pair
from srlab.errors import AmbiguousMatch, InductiveViolation, PreconditionError
from srlab.maps import ConjugatedMap, IdentityDiffeo, sine_squared_map, trig_diffeo, validate_expanding
from srlab.reconstruction import (ReconstructionConfig, ReconstructionState, conjugacy_oracle,
                                  diffeo_distance, fit_decay_factor, initial_adjustment,
                                  map_distance, run_scheme, scheme_step)


def test_oracle_identity(g_near):
    s = conjugacy_oracle(g_near, g_near, 8)
    assert np.array_equal(s.nodes_f, s.nodes_g)
    assert s.holder_exponent == pytest.approx(1.0, abs=1e-12)


def test_oracle_matches_inverse_conjugacy(f0):
    h = trig_diffeo((2e-3,), (1e-3,))
    f = ConjugatedMap(f0, [h])
    s = conjugacy_oracle(f, f0, 10)
    # phi o f = f0 o phi forces phi = h^{-1}
    assert np.max(np.abs(h.inverse(s.nodes_f) - s.nodes_g)) < 1e-12
    assert s.holder_exponent == pytest.approx(1.0, abs=0.02)


def test_oracle_displacement_bound(f0):
    f = sine_squared_map(0.12)
    s = conjugacy_oracle(f, f0, 10)
    lam = validate_expanding(f0).lambda_lower
    assert s.displacement() <= map_distance(f, f0)[0] / (lam - 1) + 1e-15


def test_oracle_rejects_degree_mismatch(f0):
    from srlab.maps import linear_map
    with pytest.raises(PreconditionError):
        conjugacy_oracle(f0, linear_map(3), 4)


def test_initial_adjustment_identity(f0):
    w = initial_adjustment(f0, f0, 4)
    assert all(v == 0 for v in w.norms.values())


def test_initial_adjustment_small_conjugacy(f0):
    f = ConjugatedMap(f0, [trig_diffeo((1e-5,))])
    w = initial_adjustment(f, f0, 4)
    assert diffeo_distance(w.h)[0] <= 1e-4


def test_initial_adjustment_too_far(L2):
    with pytest.raises(AmbiguousMatch):
        initial_adjustment(sine_squared_map(0.25), L2, 4)


def test_step_identity(g_near):
    cfg = ReconstructionConfig(max_k=6)
    res = run_scheme(g_near, g_near, ReconstructionConfig(max_k=5))
    state = res.state
    nxt = scheme_step(g_near, g_near, state, cfg)
    d = nxt.diagnostics[-1]
    assert d.phi_c0 < 1e-13 and d.psi_c0 < 1e-13


def test_run_identity(g_near):
    res = run_scheme(g_near, g_near, ReconstructionConfig(max_k=6))
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(res.h(x) - x)) < 1e-13
    assert res.final_error < 1e-13


def test_run_requires_near_linear_target(f0):
    with pytest.raises(PreconditionError):
        run_scheme(f0, f0)


def test_config_validation():
    with pytest.raises(PreconditionError):
        ReconstructionConfig(tau=1.5)
    with pytest.raises(PreconditionError):
        ReconstructionConfig(kappa0=9, max_k=4)
    with pytest.raises(PreconditionError):
        ReconstructionConfig(mode="guess")


def test_short_run_invariants(g_near):
    h = trig_diffeo((0.0, 1e-4))
    f = ConjugatedMap(g_near, [h])
    res = run_scheme(f, g_near, ReconstructionConfig(max_k=6, normalize=False))
    for d in res.diagnostics:
        assert d.node_residual < 1e-9
        assert d.rolle_ok
    errs = [d.oracle_error for d in res.diagnostics]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert res.oracle_assisted


def test_counterexample_initial_ambiguity():
    f, g = build_pair(0.02)
    with pytest.raises(AmbiguousMatch):
        run_scheme(f, g, ReconstructionConfig(mode="spectrum", kappa0=4, max_k=8))


def test_counterexample_norms_blow_up():
    f, g = build_pair(0.02)
    res = run_scheme(f, g, ReconstructionConfig(kappa0=2, max_k=5))
    top = [d.h_norms[2] for d in res.diagnostics]
    assert all(b > 1.5 * a for a, b in zip(top, top[1:]))
    assert all(d.violations for d in res.diagnostics[1:])
    with pytest.raises(InductiveViolation):
        run_scheme(f, g, ReconstructionConfig(kappa0=2, max_k=5, strict=True))


def test_fit_decay_factor():
    ks = np.arange(4, 12)
    assert fit_decay_factor(ks, 0.3 ** ks) == pytest.approx(0.3, rel=1e-9)
    # the series stops at the first value under the floor and keeps it
    errs = [1e-3, 1e-5, 1e-7, 1e-14, 1e-14]
    assert fit_decay_factor([1, 2, 3, 4, 5], errs) == pytest.approx(
        math.exp(np.polyfit([1, 2, 3, 4], np.log(errs[:4]), 1)[0]))
    assert math.isnan(fit_decay_factor([1], [1e-3]))
