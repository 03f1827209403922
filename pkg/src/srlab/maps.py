"""Expanding circle maps, circle diffeomorphisms and conjugated maps.

Every map is handled through its lift to the real line.  An expanding map of
degree ``d`` is ``F(x) = d*x + p(x)`` with ``p`` a 1-periodic trigonometric
polynomial vanishing at 0.  A circle diffeomorphism is a lift ``h`` with
``h(0) = 0`` and ``h(x + 1) = h(x) + 1``.

All objects expose ``jet(x, K)``: an array of shape ``(K+1, N)`` with the
value and first ``K`` derivatives at the points ``x``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _jets
from ._newton import solve_increasing
from .errors import NotMonotone, NumericalFailure, PreconditionError

TWO_PI = 2.0 * math.pi
GRID_SIZE = 1 << 14


def _as_points(x):
    arr = np.asarray(x, dtype=float)
    return arr.reshape(-1), arr.shape


def _restore(values, shape):
    values = np.asarray(values)
    if shape == ():
        return float(values.reshape(-1)[0])
    return values.reshape(shape)


# ---------------------------------------------------------------------------
# periodic perturbations


class TrigPolynomial:
    """``p(x) = sum_j a_j sin(2 pi j x) + b_j (cos(2 pi j x) - 1)``.

    The ``-1`` in the cosine terms keeps ``p(0) = 0``.
    """

    def __init__(self, sine=(), cosine=()):
        self.sine = tuple(float(c) for c in sine)
        self.cosine = tuple(float(c) for c in cosine)

    def __call__(self, x, nu=0):
        x = np.asarray(x, float)
        out = np.zeros_like(x)
        if nu == 0 and self.cosine:
            out -= sum(self.cosine)
        for j, a in enumerate(self.sine, 1):
            if a:
                out += a * _trig_derivative(np.sin, TWO_PI * j, x, nu)
        for j, b in enumerate(self.cosine, 1):
            if b:
                out += b * _trig_derivative(np.cos, TWO_PI * j, x, nu)
        return out

    def bound(self, nu):
        """Upper bound for ``sup |p^(nu)|`` from the coefficients."""
        total = 0.0
        for j, a in enumerate(self.sine, 1):
            total += abs(a) * (TWO_PI * j) ** nu
        for j, b in enumerate(self.cosine, 1):
            total += abs(b) * (TWO_PI * j) ** nu * (2.0 if nu == 0 else 1.0)
        return total

    @property
    def is_zero(self):
        return not any(self.sine) and not any(self.cosine)


def _trig_derivative(kind, w, x, nu):
    # derivatives cycle through sin, cos, -sin, -cos (or cos, -sin, -cos, sin)
    phase = nu % 4
    if kind is np.cos:
        phase = (phase + 1) % 4
    base = np.sin(w * x) if phase in (0, 2) else np.cos(w * x)
    sign = 1.0 if phase in (0, 1) else -1.0
    return sign * w ** nu * base


# ---------------------------------------------------------------------------
# expanding maps


@dataclass(frozen=True)
class CircleMapSpec:
    """Degree-``d`` lift ``F(x) = d*x + p(x)`` with a trigonometric ``p``.

    ``sine_coeffs[j-1]`` multiplies ``sin(2 pi j x)`` and ``cosine_coeffs[j-1]``
    multiplies ``cos(2 pi j x) - 1``.
    """

    degree: int
    sine_coeffs: tuple = ()
    cosine_coeffs: tuple = ()
    label: str = ""

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise PreconditionError(f"degree must be an integer >= 2, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "sine_coeffs", tuple(float(c) for c in self.sine_coeffs))
        object.__setattr__(self, "cosine_coeffs", tuple(float(c) for c in self.cosine_coeffs))
        for c in self.sine_coeffs + self.cosine_coeffs:
            if not math.isfinite(c):
                raise PreconditionError("map coefficients must be finite")

    @property
    def perturbation(self):
        return TrigPolynomial(self.sine_coeffs, self.cosine_coeffs)

    @property
    def base(self):
        return self

    def lift(self, x):
        x = np.asarray(x, float)
        return self.degree * x + self.perturbation(x)

    def jet(self, x, K):
        x = np.asarray(x, float).reshape(-1)
        p = self.perturbation
        out = np.empty((K + 1, x.size))
        out[0] = self.degree * x + p(x)
        for k in range(1, K + 1):
            out[k] = p(x, k)
        if K >= 1:
            out[1] += self.degree
        return out

    def inverse_branch(self, y, branch, x0=None):
        """Preimage of ``y`` (in ``[0, 1]``) inside fundamental interval ``branch``."""
        y = np.asarray(y, float)
        b = np.asarray(branch)
        target = y + b
        p = self.perturbation
        d = self.degree

        def fun(x):
            return d * x + p(x), d + p(x, 1)

        return solve_increasing(fun, target, 0.0, 1.0, x0=target / d if x0 is None else x0, tol=1e-15)

    def __str__(self):
        return self.label or f"CircleMapSpec(d={self.degree})"


def linear_map(d=2):
    """The linear expanding map ``x -> d*x``."""
    return CircleMapSpec(d, label=f"L{d}")


def sine_squared_map(epsilon, d=2, label=None):
    """``d*x + epsilon*sin^2(pi x)``; note ``sin^2(pi x) = (1 - cos(2 pi x))/2``."""
    return CircleMapSpec(d, (), (-0.5 * epsilon,), label=label or f"{d}x+{epsilon:g}sin^2")


# ---------------------------------------------------------------------------
# diffeomorphisms


class CircleDiffeo:
    """Base class for orientation-preserving circle diffeomorphisms fixing 0."""

    max_order = None  # highest derivative the representation supports
    label = "diffeo"

    def jet(self, x, K):
        raise NotImplementedError

    def __call__(self, x):
        pts, shape = _as_points(x)
        return _restore(self.jet(pts, 0)[0], shape)

    def derivative(self, x, order=1):
        pts, shape = _as_points(x)
        return _restore(self.jet(pts, order)[order], shape)

    def _check_order(self, K):
        if self.max_order is not None and K > self.max_order:
            raise PreconditionError(
                f"{self.label}: derivative order {K} exceeds representation order {self.max_order}")

    def inverse(self, y):
        pts, shape = _as_points(y)
        whole = np.floor(pts)
        frac = pts - whole
        if not getattr(self, "_monotone_checked", False):
            # Newton may never visit a fold, so scan once before the first inversion
            check_diffeo(self, 4096)
            self._monotone_checked = True

        def fun(x):
            j = self.jet(x, 1)
            if np.any(j[1] <= 0):
                raise NotMonotone(f"{self.label}: non-positive derivative while inverting")
            return j[0], j[1]

        x = solve_increasing(fun, frac, 0.0, 1.0, x0=frac, tol=1e-15)
        return _restore(x + whole, shape)

    @property
    def is_identity(self):
        return False


class IdentityDiffeo(CircleDiffeo):
    label = "id"

    def jet(self, x, K):
        x = np.asarray(x, float).reshape(-1)
        out = np.zeros((K + 1, x.size))
        out[0] = x
        if K >= 1:
            out[1] = 1.0
        return out

    def inverse(self, y):
        return y if np.isscalar(y) else np.asarray(y, float).copy()

    @property
    def is_identity(self):
        return True


class DisplacementDiffeo(CircleDiffeo):
    """``h(x) = x + q(x)`` with ``q`` 1-periodic, ``q(0) = 0``.

    ``q`` is any callable ``q(x, nu)`` valid on ``[0, 1)``; it is evaluated at
    ``x mod 1``.
    """

    def __init__(self, displacement, max_order=None, label="displacement"):
        self.displacement = displacement
        self.max_order = max_order
        self.label = label

    def jet(self, x, K):
        self._check_order(K)
        x = np.asarray(x, float).reshape(-1)
        xm = np.mod(x, 1.0)
        out = np.empty((K + 1, x.size))
        out[0] = x + self.displacement(xm, 0)
        for k in range(1, K + 1):
            out[k] = self.displacement(xm, k)
        if K >= 1:
            out[1] += 1.0
        return out


def trig_diffeo(sine=(), cosine=(), label="trig"):
    """``x + sum a_j sin(2 pi j x) + b_j (cos(2 pi j x) - 1)``."""
    return DisplacementDiffeo(TrigPolynomial(sine, cosine), None, label)


class MonotoneNodeDiffeo(CircleDiffeo):
    """Monotone piecewise-cubic interpolant of an increasing node correspondence."""

    max_order = 3

    def __init__(self, nodes, values, label="monotone-cubic"):
        from scipy.interpolate import PchipInterpolator

        nodes = np.asarray(nodes, float)
        values = np.asarray(values, float)
        # three periods of data so the interpolant is periodic to working accuracy
        xs = np.concatenate([nodes - 1.0, nodes, nodes + 1.0, [2.0]])
        ys = np.concatenate([values - 1.0, values, values + 1.0, [2.0]])
        self._interp = PchipInterpolator(xs, ys)
        self.nodes = nodes
        self.values = values
        self.label = label

    def jet(self, x, K):
        self._check_order(K)
        x = np.asarray(x, float).reshape(-1)
        whole = np.floor(x)
        xm = x - whole
        out = np.empty((K + 1, x.size))
        out[0] = self._interp(xm) + whole
        for k in range(1, K + 1):
            out[k] = self._interp(xm, k)
        return out


class ComposedDiffeo(CircleDiffeo):
    """``parts[-1] o ... o parts[0]``."""

    def __init__(self, parts: Sequence[CircleDiffeo]):
        flat = []
        for p in parts:
            if isinstance(p, ComposedDiffeo):
                flat.extend(p.parts)
            elif not p.is_identity:
                flat.append(p)
        self.parts = tuple(flat)
        orders = [p.max_order for p in self.parts if p.max_order is not None]
        self.max_order = min(orders) if orders else None
        self.label = "o".join(p.label for p in reversed(self.parts)) or "id"

    def jet(self, x, K):
        self._check_order(K)
        x = np.asarray(x, float).reshape(-1)
        if not self.parts:
            return IdentityDiffeo().jet(x, K)
        J = self.parts[0].jet(x, K)
        for p in self.parts[1:]:
            J = _jets.compose(p.jet(J[0], K), J) if K else p.jet(J[0], 0)
        return J

    def inverse(self, y):
        pts, shape = _as_points(y)
        for p in reversed(self.parts):
            pts = np.asarray(p.inverse(pts), float).reshape(-1)
        return _restore(pts, shape)

    @property
    def is_identity(self):
        return not self.parts


def compose_diffeos(*parts):
    """Composition applying ``parts[0]`` first."""
    return ComposedDiffeo(parts)


def diffeo_inverse(h: CircleDiffeo, y):
    """``x`` with ``h(x) = y``, by bracketed Newton iteration."""
    return h.inverse(y)


def check_diffeo(h: CircleDiffeo, n=GRID_SIZE):
    """Raise :class:`NotMonotone` unless ``h' > 0`` on an ``n``-point grid."""
    x = np.arange(n) / n
    J = h.jet(x, 1)
    if not np.all(J[1] > 0):
        raise NotMonotone(f"{h.label}: derivative not positive (min {J[1].min():.3e})")
    if abs(float(h(0.0))) > 1e-12 or abs(float(h(1.0)) - 1.0) > 1e-12:
        raise PreconditionError(f"{h.label}: does not fix 0 as a degree-one lift")
    return float(J[1].min())


# ---------------------------------------------------------------------------
# conjugated maps


class ConjugatedMap:
    """``H o F o H^{-1}`` for a base map ``F`` and ``H = chain[-1] o ... o chain[0]``."""

    def __init__(self, base, chain=()):
        chain = list(chain)
        if isinstance(base, ConjugatedMap):
            chain = list(base.chain) + chain
            base = base.base
        if not isinstance(base, CircleMapSpec):
            raise PreconditionError("base must be a CircleMapSpec or ConjugatedMap")
        self.base = base
        self.conjugacy = ComposedDiffeo(chain)
        self.chain = self.conjugacy.parts
        self.degree = base.degree
        self.label = f"conj({base.label}, {len(self.chain)})"

    def jet(self, x, K):
        x = np.asarray(x, float).reshape(-1)
        H = self.conjugacy
        if H.is_identity:
            return self.base.jet(x, K)
        y = np.asarray(H.inverse(x), float).reshape(-1)
        if K == 0:
            return H.jet(self.base.lift(y), 0)
        Jh = H.jet(y, K)
        Jinv = _jets.invert(Jh)
        Jinv[0] = y
        JF = self.base.jet(y, K)
        inner = _jets.compose(JF, Jinv)
        return _jets.compose(H.jet(JF[0], K), inner)

    def lift(self, x):
        pts, shape = _as_points(x)
        return _restore(self.jet(pts, 0)[0], shape)

    def inverse_branch(self, y, branch):
        H = self.conjugacy
        z = H.inverse(np.asarray(y, float))
        w = self.base.inverse_branch(z, branch)
        return H(w)

    def __str__(self):
        return self.label


def evaluate(map_, x, derivative_order=0):
    """Value (order 0) or derivative of the lift of ``map_`` at ``x``."""
    if derivative_order < 0 or int(derivative_order) != derivative_order:
        raise PreconditionError("derivative_order must be a non-negative integer")
    pts, shape = _as_points(x)
    return _restore(map_.jet(pts, int(derivative_order))[int(derivative_order)], shape)


def inverse_branch(map_, y, branch):
    """Preimage of ``y`` in the fundamental interval with index ``branch``.

    Branch ``b`` is ``[F^{-1}(b), F^{-1}(b+1))``; branch 0 fixes 0.
    """
    b = np.asarray(branch)
    if np.any(b < 0) or np.any(b >= map_.degree):
        raise PreconditionError(f"branch must lie in [0, {map_.degree})")
    y = np.asarray(y, float)
    out = map_.inverse_branch(y, b)
    return float(out) if np.ndim(out) == 0 else out


def branch_points(map_):
    """Preimages of 0: the left endpoints of the fundamental intervals."""
    return np.array([0.0] + [float(map_.inverse_branch(0.0, b)) for b in range(1, map_.degree)])


# ---------------------------------------------------------------------------
# validity


@dataclass
class ValidityReport:
    degree: int
    Lambda: float
    Omega: float
    a: float
    lambda_lower: float
    omega_upper: float
    derivative_lipschitz: float
    distance_c0: float
    distance_c1: float
    distance_c2: float
    expanding: bool
    near_linear: bool
    certified: bool
    grid_size: int = GRID_SIZE
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def validate_expanding(map_, grid_size=GRID_SIZE):
    """Expansion constants and distance to the linear map.

    Sampled extrema on ``grid_size`` points are widened by ``h/2`` times a
    bound on the next derivative.  For trigonometric maps that bound comes
    from the coefficients and the report is certified; for conjugated maps
    the next derivative is itself sampled and ``certified`` is False.
    """
    d = map_.degree
    x = np.arange(grid_size) / grid_size
    half = 0.5 / grid_size
    J = map_.jet(x, 3)
    pert = [J[0] - d * x, J[1] - d, J[2], J[3]]
    if isinstance(map_, CircleMapSpec):
        p = map_.perturbation
        nxt = [p.bound(k + 1) for k in range(3)]
        certified = True
    else:
        nxt = [float(np.max(np.abs(pert[k + 1]))) for k in range(3)]
        certified = False
    sup = [float(np.max(np.abs(pert[k]))) + half * nxt[k] for k in range(3)]
    fp = J[1]
    Lambda = float(fp.min())
    Omega = float(fp.max())
    lam_lo = Lambda - half * nxt[1]
    om_hi = Omega + half * nxt[1]
    expanding = lam_lo > 1.0
    c1 = max(sup[0], sup[1])
    c2 = max(c1, sup[2])
    a = math.log(Omega) / math.log(Lambda) if Lambda > 1 else float("nan")
    return ValidityReport(
        degree=d, Lambda=Lambda, Omega=Omega, a=a, lambda_lower=lam_lo, omega_upper=om_hi,
        derivative_lipschitz=sup[2], distance_c0=sup[0], distance_c1=c1, distance_c2=c2,
        expanding=bool(expanding), near_linear=bool(c2 < (d - 1) / 2.0),
        certified=certified, grid_size=grid_size)


def require_expanding(map_):
    rep = validate_expanding(map_)
    if not rep.expanding:
        raise PreconditionError(
            f"{map_}: not expanding (min derivative {rep.Lambda:.6g})")
    return rep


# ---------------------------------------------------------------------------
# JSON


def map_to_dict(spec: CircleMapSpec):
    return {
        "degree": spec.degree,
        "sine_coeffs": list(spec.sine_coeffs),
        "cosine_coeffs": list(spec.cosine_coeffs),
        "label": spec.label,
    }


def map_from_dict(data):
    try:
        return CircleMapSpec(
            int(data["degree"]), tuple(data.get("sine_coeffs", ())),
            tuple(data.get("cosine_coeffs", ())), str(data.get("label", "")))
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed map specification: {exc}") from None


def save_map(spec, path):
    with open(path, "w") as fh:
        json.dump(map_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_map(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"{path}: invalid JSON ({exc})") from None
    return map_from_dict(data)
