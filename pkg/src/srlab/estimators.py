"""scikit-learn style wrappers around the fitting steps.

Each estimator learns a circle map (or a function on the circle) in ``fit``
and applies it to points in ``transform``.  Hyperparameters go through
``__init__`` unchanged so ``get_params``/``set_params``/``clone`` work.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_circle_nodes, check_map, check_points, check_positive_int
from .livsic import barrier_function, coboundary_residual, default_truncation
from .normalization import invariant_density, lebesgue_identity_residual, normalize_map
from .reconstruction import ReconstructionConfig, run_scheme
from .whitney import extend_correspondence


class WhitneyExtension(TransformerMixin, BaseEstimator):
    """Smooth diffeomorphism through a node correspondence.

    ``fit(source, target)`` builds ``h`` with ``h(source[i]) = target[i]``;
    ``transform`` evaluates ``h`` and ``inverse_transform`` its inverse.
    """

    def __init__(self, r=1):
        self.r = r

    def fit(self, X, y):
        src = check_circle_nodes(X, "source")
        dst = check_circle_nodes(y, "target")
        self.result_ = extend_correspondence(src, dst, self.r)
        self.h_ = self.result_.h
        self.n_nodes_ = src.size
        return self

    def transform(self, X):
        check_is_fitted(self, "h_")
        return np.asarray(self.h_(check_points(X)), float)

    def inverse_transform(self, X):
        check_is_fitted(self, "h_")
        return np.asarray(self.h_.inverse(check_points(X)), float)


class MeasureNormalizer(TransformerMixin, BaseEstimator):
    """Invariant density and the conjugacy that makes a map Lebesgue-preserving."""

    def __init__(self, grid_size=4096, tol=1e-12, max_iter=100_000):
        self.grid_size = grid_size
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        m = check_map(X)
        check_positive_int(self.grid_size, "grid_size")
        self.density_ = invariant_density(m, self.grid_size, self.tol, self.max_iter)
        self.normalized_map_ = normalize_map(m, self.density_)
        self.conjugacy_ = self.normalized_map_.chain[-1]
        self.identity_residual_ = lebesgue_identity_residual(self.normalized_map_)
        return self

    def transform(self, X):
        check_is_fitted(self, "conjugacy_")
        return np.asarray(self.conjugacy_(check_points(X)), float)

    def inverse_transform(self, X):
        check_is_fitted(self, "conjugacy_")
        return np.asarray(self.conjugacy_.inverse(check_points(X)), float)


class LivsicSolver(TransformerMixin, BaseEstimator):
    """Barrier-function solution ``u`` of ``D = u o g - u``.

    ``fit(g, D)`` takes the map and a vectorized callable ``D``;
    ``transform`` evaluates ``u``.
    """

    def __init__(self, truncation=None, grid_size=4096):
        self.truncation = truncation
        self.grid_size = grid_size

    def fit(self, X, y):
        g = check_map(X)
        if not callable(y):
            raise TypeError("D must be callable")
        S = default_truncation(g) if self.truncation is None else check_positive_int(self.truncation, "truncation")
        self.u_ = barrier_function(g, y, S, self.grid_size)
        self.residual_ = coboundary_residual(g, y, self.u_)
        self.truncation_ = S
        return self

    def transform(self, X):
        check_is_fitted(self, "u_")
        return np.asarray(self.u_(check_points(X)), float)


class ConjugacyReconstructor(TransformerMixin, BaseEstimator):
    """Runs the inductive scheme; ``fit(f, g)`` learns ``h`` with ``h o f o h^{-1} = g``."""

    def __init__(self, kappa0=4, max_k=12, tau=0.5, r=1, mode="oracle", oracle_depth=12,
                 normalize=True):
        self.kappa0 = kappa0
        self.max_k = max_k
        self.tau = tau
        self.r = r
        self.mode = mode
        self.oracle_depth = oracle_depth
        self.normalize = normalize

    def fit(self, X, y):
        f, g = check_map(X, "f"), check_map(y, "g")
        cfg = ReconstructionConfig(kappa0=self.kappa0, tau=self.tau, r=self.r, max_k=self.max_k,
                                   mode=self.mode, oracle_depth=self.oracle_depth,
                                   normalize=self.normalize)
        self.result_ = run_scheme(f, g, cfg)
        self.h_ = self.result_.h
        self.diagnostics_ = self.result_.diagnostics
        return self

    def transform(self, X):
        check_is_fitted(self, "h_")
        return np.asarray(self.h_(check_points(X)), float)

    def inverse_transform(self, X):
        check_is_fitted(self, "h_")
        return np.asarray(self.h_.inverse(check_points(X)), float)
