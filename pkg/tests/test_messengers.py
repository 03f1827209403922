import numpy as np
import pytest

from srlab.errors import PreconditionError
from srlab.maps import validate_expanding
from srlab.messengers import hybrid_code, hybrid_messenger, messenger, messenger_survey, pseudo_orbit
from srlab.orbits import gap_constant, gap_statistics


def test_linear_closed_form(L2):
    m = messenger(L2, "00", "01", 1, 1)
    assert m.code == "0001"
    assert m.y_minus == pytest.approx(1 / 15, abs=1e-12)
    assert m.y_plus == pytest.approx(4 / 15, abs=1e-12)
    assert m.t_minus == pytest.approx(1 / 15, abs=1e-12)
    assert m.t_plus == pytest.approx(1 / 15, abs=1e-12)


def test_linear_locations_are_rationals(L2):
    for a, b, p, q in [("001", "011", 2, 1), ("01", "10", 1, 3), ("0", "1", 2, 2)]:
        m = messenger(L2, a, b, p, q)
        top = 2 ** m.period - 1
        assert m.y_minus == pytest.approx(int(m.code, 2) / top, abs=1e-12)
        assert len(m.code) == (p + q) * len(a)


def test_degenerate_endpoints_flagged(L2):
    m = messenger(L2, "01", "01", 2, 1)
    assert m.degenerate and m.y_minus == pytest.approx(1 / 3, abs=1e-12)


def test_f0_flags(f0):
    assert messenger(f0, "001", "010", 2, 2).expansion_bounds_ok


def test_monotone_improvement(f0):
    t = [messenger(f0, "001", "011", p, 1).t_minus for p in range(1, 6)]
    assert all(b < a for a, b in zip(t, t[1:]))


def test_survey_bounds_small(f0):
    s = messenger_survey(f0, 3, 2, 1)
    assert s.expansion_bounds_ok and s.between_ok and s.pairs == 7 * 6


def test_period_mismatch(f0):
    with pytest.raises(PreconditionError):
        messenger(f0, "01", "001", 1, 1)


def test_hybrid_rejects_t_out_of_range(L2):
    with pytest.raises(PreconditionError):
        hybrid_messenger(L2, "01", 2, 1)


def test_hybrid_linear(L2):
    h = hybrid_messenger(L2, "0110", 2, 1)
    assert h.code == "0000" + "01" + "1001" and h.period == 10
    assert h.z_minus == pytest.approx(int(h.code, 2) / (2 ** 10 - 1), abs=1e-12)
    assert np.isfinite(h.deviation) and h.within_bound
    assert hybrid_code("0110", 2, 3).period == 2 * 3 * 4 + 2


def test_hybrid_f0(f0):
    assert hybrid_messenger(f0, "011", 2, 2).within_bound


def test_pseudo_orbit_linear_seams(L2):
    po = pseudo_orbit(L2, "01", 1, 1)
    C = gap_constant(validate_expanding(L2))
    O2 = gap_statistics(L2, 2).O
    assert max(po.seam_jumps) <= C * O2 + 1e-15
    assert po.segments == (2, 1, 2)


def test_pseudo_orbit_degenerate(L2):
    po = pseudo_orbit(L2, "0", 1, 1)
    assert po.max_jump == 0.0 and np.all(po.points == 0)


def test_pseudo_orbit_f0(f0):
    po = pseudo_orbit(f0, "011", 2, 2)
    h = hybrid_messenger(f0, "011", 2, 2)
    O3 = gap_statistics(f0, 3).O
    assert po.max_jump < h.bound_constant * O3 ** 2
