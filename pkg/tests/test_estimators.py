import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from srlab.errors import PreconditionError
from srlab.estimators import ConjugacyReconstructor, LivsicSolver, MeasureNormalizer, WhitneyExtension
from srlab.maps import ConjugatedMap, evaluate, trig_diffeo
from srlab.orbits import enumerate_batch


def test_params_and_clone():
    for est in (WhitneyExtension(r=2), MeasureNormalizer(grid_size=512), LivsicSolver(truncation=30),
                ConjugacyReconstructor(max_k=7, normalize=False)):
        c = clone(est)
        assert c.get_params() == est.get_params()
        assert type(c) is type(est)
    w = WhitneyExtension().set_params(r=3)
    assert w.r == 3


def test_not_fitted():
    with pytest.raises(NotFittedError):
        WhitneyExtension().transform([0.1])


def test_whitney_extension(f0):
    src = enumerate_batch(f0, 5).points
    dst = enumerate_batch(ConjugatedMap(f0, [trig_diffeo((1e-3,))]), 5).points
    est = WhitneyExtension(r=1).fit(src, dst)
    assert np.max(np.abs(est.transform(src) - dst)) < 1e-12
    assert np.max(np.abs(est.inverse_transform(dst) - src)) < 1e-12
    assert est.n_nodes_ == 31


def test_whitney_rejects_outside_nodes():
    with pytest.raises(PreconditionError):
        WhitneyExtension().fit([0.0, 1.2], [0.0, 0.5])


def test_measure_normalizer(f0):
    est = MeasureNormalizer(grid_size=1024).fit(f0)
    assert est.identity_residual_ < 1e-8
    x = np.linspace(0, 1, 9)
    assert np.max(np.abs(est.inverse_transform(est.transform(x)) - x)) < 1e-13


def test_measure_normalizer_type_check():
    with pytest.raises(PreconditionError):
        MeasureNormalizer().fit("not a map")


def test_livsic_solver(f0):
    v = lambda x: 0.05 * np.sin(2 * np.pi * np.asarray(x))
    D = lambda x: v(evaluate(f0, x)) - v(x)
    est = LivsicSolver(grid_size=1024).fit(f0, D)
    assert est.residual_ < 1e-6 and est.truncation_ == 64
    x = np.linspace(0, 0.99, 7)
    assert np.max(np.abs(est.transform(x) - v(x))) < 1e-8


def test_livsic_requires_callable(f0):
    with pytest.raises(TypeError):
        LivsicSolver().fit(f0, [1, 2, 3])


def test_reconstructor(g_near):
    h = trig_diffeo((0.0, 1e-4))
    f = ConjugatedMap(g_near, [h])
    est = ConjugacyReconstructor(max_k=8).fit(f, g_near)
    x = np.linspace(0, 1, 33)
    assert np.max(np.abs(est.transform(x) - h.inverse(x))) < 1e-6
    assert len(est.diagnostics_) >= 2
