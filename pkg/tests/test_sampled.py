import numpy as np
import pytest

from srlab.sampled import SampledFunction, derivative_sup


def test_interpolates_trig_exactly_enough():
    s = SampledFunction.from_callable(lambda x: np.sin(2 * np.pi * x), 1024)
    x = np.linspace(0, 1, 777)
    assert np.max(np.abs(s(x) - np.sin(2 * np.pi * x))) < 1e-10
    assert np.max(np.abs(s(x, 1) - 2 * np.pi * np.cos(2 * np.pi * x))) < 1e-6


def test_periodic_evaluation():
    s = SampledFunction.from_callable(lambda x: np.cos(2 * np.pi * x), 256)
    assert s(1.25) == pytest.approx(s(0.25), abs=1e-15)
    assert s(-0.25) == pytest.approx(s(0.75), abs=1e-15)


def test_arithmetic_and_integral():
    a = SampledFunction.from_callable(lambda x: 1 + 0 * x, 64)
    b = SampledFunction.from_callable(lambda x: np.sin(2 * np.pi * x), 64)
    c = a * 2.0 + b - b
    assert np.allclose(c.values, 2.0)
    assert c.integral() == pytest.approx(2.0, abs=1e-14)


def test_derivative_sup_callable_and_sampled():
    fn = lambda x: 0.3 * np.sin(2 * np.pi * np.asarray(x))
    assert derivative_sup(fn) == pytest.approx(0.6 * np.pi, rel=1e-6)
    s = SampledFunction.from_callable(fn)
    assert derivative_sup(s) == pytest.approx(0.6 * np.pi, rel=1e-6)
