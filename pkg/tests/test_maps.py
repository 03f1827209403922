import math

import numpy as np
import pytest

from srlab.errors import NotMonotone, PreconditionError
from srlab.maps import (CircleMapSpec, ConjugatedMap, IdentityDiffeo, MonotoneNodeDiffeo,
                        branch_points, check_diffeo, compose_diffeos, diffeo_inverse, evaluate,
                        inverse_branch, linear_map, load_map, map_from_dict, map_to_dict, save_map,
                        sine_squared_map, trig_diffeo, validate_expanding)


def test_eval_examples(L2, f0):
    assert evaluate(L2, 0.25, 0) == 0.5
    assert evaluate(f0, 0.0, 1) == pytest.approx(2.0, abs=1e-15)
    assert evaluate(f0, 0.25, 1) == pytest.approx(2 + 0.1 * math.pi, abs=1e-14)


def test_eval_rejects_negative_order(f0):
    with pytest.raises(PreconditionError):
        evaluate(f0, 0.1, -1)


def test_node_diffeo_order_limit():
    h = MonotoneNodeDiffeo(np.array([0.0, 0.3, 0.6]), np.array([0.0, 0.31, 0.6]))
    with pytest.raises(PreconditionError):
        ConjugatedMap(linear_map(2), [h]).jet(np.array([0.2]), 5)


def test_inverse_branch_examples(L2, f0):
    assert inverse_branch(L2, 0.5, 0) == pytest.approx(0.25, abs=1e-15)
    assert inverse_branch(L2, 0.5, 1) == pytest.approx(0.75, abs=1e-15)
    assert inverse_branch(f0, 0.0, 0) == 0.0
    with pytest.raises(PreconditionError):
        inverse_branch(L2, 0.5, 2)


def test_inverse_branch_round_trip(f0):
    y = np.arange(1000) / 1000
    for b in range(2):
        x = inverse_branch(f0, y, np.full(y.shape, b))
        assert np.max(np.abs(evaluate(f0, x, 0) - b - y)) < 1e-12


def test_branch_intervals_partition(f0):
    bp = branch_points(f0)
    assert bp[0] == 0.0 and 0 < bp[1] < 1
    x = inverse_branch(f0, 0.3, 1)
    assert bp[1] <= x < 1


def test_derivatives_match_finite_differences(f0):
    x = np.arange(10_000) / 10_000
    h = 1e-6
    fd = (evaluate(f0, x + h) - evaluate(f0, x - h)) / (2 * h)
    assert np.max(np.abs(fd / evaluate(f0, x, 1) - 1)) < 1e-6
    cm = ConjugatedMap(f0, [trig_diffeo((0.01,), (0.004,))])
    fd = (evaluate(cm, x + h) - evaluate(cm, x - h)) / (2 * h)
    assert np.max(np.abs(fd / evaluate(cm, x, 1) - 1)) < 1e-6
    fd2 = (evaluate(cm, x + h, 1) - evaluate(cm, x - h, 1)) / (2 * h)
    assert np.max(np.abs(fd2 - evaluate(cm, x, 2))) < 1e-5


def test_conjugated_with_identity_equals_base(f0):
    x = np.arange(512) / 512
    cm = ConjugatedMap(f0, [IdentityDiffeo()])
    assert np.max(np.abs(evaluate(cm, x) - evaluate(f0, x))) < 1e-14


def test_conjugated_lift_properties(f0):
    cm = ConjugatedMap(f0, [trig_diffeo((0.02,))])
    x = np.linspace(0, 1, 101)
    assert evaluate(cm, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert np.max(np.abs(evaluate(cm, x + 1) - evaluate(cm, x) - 2)) < 1e-12


def test_validate_linear(L2):
    rep = validate_expanding(L2)
    assert rep.Lambda == 2.0 and rep.Omega == 2.0 and rep.a == 1.0
    assert rep.near_linear and rep.expanding and rep.certified


def test_validate_f0(f0):
    rep = validate_expanding(f0)
    assert rep.Lambda == pytest.approx(2 - 0.1 * math.pi, abs=1e-7)
    assert rep.Omega == pytest.approx(2 + 0.1 * math.pi, abs=1e-7)
    assert rep.lambda_lower <= 2 - 0.1 * math.pi <= rep.Lambda + 1e-12
    # the second derivative of 0.1 sin^2(pi x) reaches 0.2 pi^2 > 1/2
    assert rep.distance_c2 >= 0.2 * math.pi ** 2 - 1e-9
    assert not rep.near_linear


def test_validate_not_expanding():
    assert not validate_expanding(sine_squared_map(0.9)).expanding


def test_diffeo_inverse_examples():
    assert diffeo_inverse(IdentityDiffeo(), 0.3) == 0.3
    h = trig_diffeo((0.01,))
    assert diffeo_inverse(h, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert diffeo_inverse(h, 0.5) == pytest.approx(0.5, abs=1e-15)
    y = np.linspace(0, 1, 257)
    assert np.max(np.abs(h(diffeo_inverse(h, y)) - y)) < 1e-14


def test_non_monotone_inverse_raises():
    h = trig_diffeo((0.3,))
    with pytest.raises(NotMonotone):
        check_diffeo(h)
    with pytest.raises(NotMonotone):
        diffeo_inverse(h, 0.3)


def test_compose_order():
    a, b = trig_diffeo((0.01,)), trig_diffeo((), (0.02,))
    ab = compose_diffeos(a, b)
    x = np.linspace(0, 1, 33)
    assert np.max(np.abs(ab(x) - b(a(x)))) < 1e-15
    assert np.max(np.abs(ab.inverse(ab(x)) - x)) < 1e-13


def test_json_round_trip_bit_exact(tmp_path, f0):
    spec = CircleMapSpec(3, (0.1 / 3, 1e-17), (-0.0123456789012345678,), "odd")
    path = tmp_path / "m.json"
    save_map(spec, path)
    back = load_map(path)
    assert back == spec
    assert map_from_dict(map_to_dict(f0)) == f0


def test_malformed_map_dict():
    with pytest.raises(PreconditionError):
        map_from_dict({"sine_coeffs": []})
