"""Arithmetic on truncated Taylor jets.

A jet of order K at a batch of points is an array of shape ``(K+1, N)``
holding the value and the first K derivatives.  Composition and inversion
follow from truncated power-series arithmetic, which gives exact chain-rule
derivatives of any order for composed maps.
"""
import math

import numpy as np


def _factorials(K):
    return np.array([math.factorial(k) for k in range(K + 1)], float)[:, None]


def _mul(P, Q):
    K = P.shape[0] - 1
    R = np.zeros_like(P)
    for m in range(K + 1):
        for i in range(m + 1):
            R[m] += P[i] * Q[m - i]
    return R


def _compose_taylor(a, b):
    # a: Taylor coefficients of the outer map, b: of the inner map (b[0] ignored)
    K = a.shape[0] - 1
    B = b.copy()
    B[0] = 0.0
    P = np.zeros_like(B)
    P[0] = 1.0
    out = a[0] * P
    for k in range(1, K + 1):
        P = _mul(P, B)
        out = out + a[k] * P
    return out


def compose(outer, inner):
    """Jet of ``u o v`` from the jet of ``u`` at ``v(x)`` and the jet of ``v`` at ``x``."""
    outer = np.asarray(outer, float)
    inner = np.asarray(inner, float)
    K = inner.shape[0] - 1
    fac = _factorials(K)
    c = _compose_taylor(outer / fac, inner / fac)
    return c * fac


def invert(jet):
    """Jet of ``h^{-1}`` at ``h(x)`` from the jet of ``h`` at ``x``."""
    jet = np.asarray(jet, float)
    K = jet.shape[0] - 1
    fac = _factorials(K)
    a = jet / fac
    g = np.zeros_like(a)
    if K >= 1:
        g[1] = 1.0 / a[1]
    for m in range(2, K + 1):
        a0 = a.copy()
        a0[0] = 0.0
        c = _compose_taylor(a0[: m + 1], g[: m + 1])
        g[m] = -c[m] / a[1]
    out = g * fac
    out[0] = jet[0] * 0.0  # caller fills in the base point
    return out
