"""Inductive reconstruction of a smooth conjugacy from matched periodic data.

Starting from ``h`` matching the period-``kappa0`` points of ``f`` and ``g``,
each step

1. normalizes the current conjugate ``f_k = h_k o f o h_k^{-1}`` to preserve
   Lebesgue measure (``psi``),
2. checks the marking of multipliers (from the spectra, or by codes), and
3. moves the period-``(k+1)`` points of the normalized map onto those of
   ``g`` with a Whitney extension (``phi``),

so that ``h_{k+1} = phi o psi o h_k``.  ``f_k`` is kept as a conjugation
chain over the base map, never resampled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousMatch, InductiveViolation, NumericalFailure, PreconditionError
from .maps import ComposedDiffeo, ConjugatedMap, IdentityDiffeo, validate_expanding
from .normalization import invariant_density, normalizing_conjugacy
from .orbits import circle_gaps, enumerate_batch
from .spectrum import SparsityParams, default_sparsity_parameters, length_spectrum, recover_marking
from .whitney import extend_correspondence, sampled_norms

NORM_GRID = 1 << 14


def _grid(n=NORM_GRID):
    return np.arange(n) / n


def _as_conjugated(m):
    return m if isinstance(m, ConjugatedMap) else ConjugatedMap(m)


def map_distance(f, g, n=NORM_GRID):
    """``(||f - g||_{C^0}, ||f - g||_{C^1}, Lip(f - g))`` of the lifts on an ``n``-point grid."""
    x = _grid(n)
    Jf, Jg = f.jet(x, 1), g.jet(x, 1)
    c0 = float(np.max(np.abs(Jf[0] - Jg[0])))
    lip = float(np.max(np.abs(Jf[1] - Jg[1])))
    return c0, max(c0, lip), lip


def diffeo_distance(h, n=NORM_GRID, r=1):
    """``||h - id||_{C^{j-1,1}}`` for ``j = 1..r+1`` (``j = 1`` is the Lipschitz norm)."""
    def q(x, nu=0):
        J = h.jet(np.asarray(x, float), max(nu, 0))
        v = J[nu].copy()
        if nu == 0:
            v -= x
        elif nu == 1:
            v -= 1.0
        return v

    c0 = float(np.max(np.abs(q(_grid(n)))))
    out = {0: c0}
    out.update(sampled_norms(q, r + 1, n))
    return out


def diffeo_gap(h1, h2, n=NORM_GRID):
    x = _grid(n)
    return float(np.max(np.abs(np.asarray(h1(x)) - np.asarray(h2(x)))))


# ---------------------------------------------------------------------------
# configuration and state


@dataclass(frozen=True)
class ReconstructionConfig:
    kappa0: int = 4
    tau: float = 0.5
    r: int = 1
    max_k: int = 12
    eta: float = 2.0
    mode: str = "oracle"            # 'oracle' (code marking) or 'spectrum'
    params: SparsityParams | None = None
    oracle_depth: int = 12
    cauchy_tol: float = 1e-13
    divergence_steps: int = 3
    density_grid: int = 4096
    strict: bool = False            # raise on inductive-assumption violations
    normalize: bool = True          # False skips the measure normalization (ablation)

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise PreconditionError("tau must lie in (0, 1)")
        if self.kappa0 < 1 or self.max_k < self.kappa0:
            raise PreconditionError("need 1 <= kappa0 <= max_k")
        if self.mode not in ("oracle", "spectrum"):
            raise PreconditionError("mode must be 'oracle' or 'spectrum'")
        if self.r < 0:
            raise PreconditionError("r must be non-negative")


@dataclass
class StepDiagnostics:
    k: int
    h_norms: dict                  # ||h_k - id||, keys 0 (C^0) and 1..r+1
    distance_c0: float             # ||f_k - g||_{C^0}
    distance_c1: float
    distance_lip: float
    O_k: float
    o_k: float
    rolle_bound: float             # Lip(f_k - g) * O_k
    rolle_ok: bool
    node_residual: float           # max |f_k - g| on the period-k points of g
    phi_c0: float = 0.0
    psi_c0: float = 0.0
    phi_top: float = 0.0
    psi_top: float = 0.0
    top_norm_bound: float = 0.0    # U: running bound on ||h_k - id||_{C^{r,1}}
    marking_depth: float = 0.0     # N_{k+1}
    choice_lhs: float = 0.0
    choice_ok: bool = True
    conjugation_constant: float = 0.0   # T
    composition_constant: float = 0.0   # Q
    cauchy: float = math.nan       # ||h_k - h_{k-1}||_{C^0}
    oracle_error: float = math.nan # max |h_k(x) - phi(x)| on the oracle samples
    marking: str = "none"
    whitney_notes: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    def as_dict(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["h_norms"] = {str(k): v for k, v in self.h_norms.items()}
        return out


@dataclass(frozen=True)
class ReconstructionState:
    k: int
    h: object
    f_k: ConjugatedMap
    diagnostics: tuple
    oracle_assisted: bool = False

    @property
    def last(self) -> StepDiagnostics:
        return self.diagnostics[-1]


# ---------------------------------------------------------------------------
# oracle


@dataclass
class ConjugacySample:
    """Samples ``phi(x_f) = x_g`` at the preimages of 0 under ``f^depth`` and ``g^depth``."""

    depth: int
    nodes_f: np.ndarray
    nodes_g: np.ndarray
    holder_exponent: float

    def error_of(self, h):
        return float(np.max(np.abs(np.asarray(h(self.nodes_f), float) - self.nodes_g)))

    def displacement(self):
        return float(np.max(np.abs(self.nodes_g - self.nodes_f)))


def _preimage_tree(m, depth):
    """Preimages of 0 under ``m^depth`` ordered by code (first symbol most significant)."""
    pts = np.array([0.0])
    d = m.degree
    for _ in range(depth):
        # new first symbol b applied to every existing point
        pts = np.concatenate([np.asarray(m.inverse_branch(pts, np.full(pts.shape, b)), float)
                              for b in range(d)])
    return np.mod(pts, 1.0)


def conjugacy_oracle(f, g, depth=12) -> ConjugacySample:
    """The topological conjugacy ``phi`` with ``phi o f = g o phi``, ``phi(0) = 0``, on a code grid.

    The Hoelder exponent is the slope of ``log max gap_g`` against
    ``log max gap_f`` across depths.
    """
    from .config import check_budget

    if f.degree != g.degree:
        raise PreconditionError("maps have different degrees")
    if depth < 1:
        raise PreconditionError("depth must be positive")
    check_budget(f.degree ** depth, depth, "conjugacy oracle")
    xf = _preimage_tree(f, depth)
    xg = _preimage_tree(g, depth)
    lo = max(1, depth // 3)
    gf, gg = [], []
    for j in range(lo, depth + 1):
        step = f.degree ** (depth - j)
        gf.append(circle_gaps(xf[::step]).max())
        gg.append(circle_gaps(xg[::step]).max())
    if len(gf) >= 2:
        slope = float(np.polyfit(np.log(gf), np.log(gg), 1)[0])
    else:
        slope = 1.0
    return ConjugacySample(depth, xf, xg, slope)


# ---------------------------------------------------------------------------
# steps


def _check_pair(f, g):
    if f.degree != g.degree:
        raise PreconditionError("maps have different degrees")
    rf, rg = validate_expanding(f), validate_expanding(g)
    if not (rf.expanding and rg.expanding):
        raise PreconditionError("both maps must be expanding")
    return rf, rg


def initial_adjustment(f, g, kappa0, r=1):
    """Whitney extension of the order-preserving map from period-``kappa0`` points of ``f`` to those of ``g``.

    Raises :class:`AmbiguousMatch` when the displacement bound
    ``||f - g||_{C^0}/(Lambda - 1)`` reaches half the smallest gap, where
    matching by order is no longer guaranteed to be the conjugacy.
    """
    _, rg = _check_pair(f, g)
    pf = enumerate_batch(f, kappa0).points
    pg = enumerate_batch(g, kappa0).points
    c0, _, _ = map_distance(f, g)
    o = float(min(circle_gaps(pf).min(), circle_gaps(pg).min()))
    displacement = c0 / (rg.lambda_lower - 1.0)
    if displacement >= o / 2:
        raise AmbiguousMatch(
            f"point displacement bound {displacement:.3e} is not below half the gap {o:.3e} "
            f"at period {kappa0}")
    return extend_correspondence(pf, pg, r)


def _node_residual(f_k, g, k):
    pg = enumerate_batch(g, k).points
    a = np.asarray(f_k.jet(pg, 0)[0], float)
    b = np.asarray(g.jet(pg, 0)[0], float)
    return float(np.max(np.abs(a - b)))


def _diagnose(f_k, g, h, k, r, prev=None):
    c0, c1, lip = map_distance(f_k, g)
    gaps = circle_gaps(enumerate_batch(g, k).points)
    O, o = float(gaps.max()), float(gaps.min())
    bound = lip * O
    return StepDiagnostics(
        k=k, h_norms=diffeo_distance(h, r=r), distance_c0=c0, distance_c1=c1, distance_lip=lip,
        O_k=O, o_k=o, rolle_bound=bound, rolle_ok=bool(c0 <= bound * (1 + 1e-9) + 1e-14),
        node_residual=_node_residual(f_k, g, k))


def _default_params(d):
    beta, gamma, _ = default_sparsity_parameters(d)
    return SparsityParams(beta, gamma)


def _marking(cfg, f_tilde, g, k, spec_g, delta1):
    """Return the marking label; raise if the spectrum marking contradicts codes."""
    if cfg.mode == "oracle":
        return "codes", True
    spec_f = length_spectrum(f_tilde, k + 1)
    params = cfg.params or _default_params(g.degree)
    table = recover_marking(spec_f, spec_g, delta1, params, cfg.eta, kappa0=cfg.kappa0)
    if table.recovered_up_to >= k + 1:
        if not table.code_consistent:
            raise AmbiguousMatch(f"period {k + 1}: spectral marking disagrees with the code marking")
        return "spectrum", False
    return "codes (spectrum too shallow)", True


def _conjugation_constant(diag, top, fg_c1):
    # T with ||h f h^{-1} - g||_{C^1} <= T (||h - id|| + ||f - g||_{C^1})
    denom = diag.h_norms[top] + fg_c1
    return diag.distance_c1 / denom if denom > 0 else 0.0


def scheme_step(f, g, state: ReconstructionState, cfg: ReconstructionConfig, spec_g=None,
                oracle: ConjugacySample | None = None, lam=None, a=None, fg_c1=None):
    """One inductive step ``k -> k+1``."""
    k = state.k
    if fg_c1 is None:
        fg_c1 = map_distance(f, g)[1]
    if lam is None or a is None:
        rg = validate_expanding(g)
        lam = rg.lambda_lower
        a = max(1.0, math.log(rg.omega_upper) / math.log(lam))
    if cfg.normalize:
        psi = normalizing_conjugacy(state.f_k, invariant_density(state.f_k, G=cfg.density_grid))
    else:
        psi = IdentityDiffeo()
    f_tilde = ConjugatedMap(state.f_k, [psi])
    delta1 = map_distance(f_tilde, g)[1]
    label, assisted = _marking(cfg, f_tilde, g, k, spec_g, delta1)
    src = enumerate_batch(f_tilde, k + 1).points
    dst = enumerate_batch(g, k + 1).points
    w = extend_correspondence(src, dst, cfg.r)
    phi = w.h
    h_new = ComposedDiffeo([state.h, psi, phi])
    f_new = ConjugatedMap(state.f_k, [psi, phi])
    diag = _diagnose(f_new, g, h_new, k + 1, cfg.r)
    diag.marking = label
    diag.whitney_notes = list(w.notes)
    psi_n = diffeo_distance(psi, r=cfg.r)
    phi_n = diffeo_distance(phi, r=cfg.r)
    top = cfg.r + 1
    diag.psi_c0, diag.phi_c0 = psi_n[0], phi_n[0]
    diag.psi_top, diag.phi_top = psi_n[top], phi_n[top]
    prev = state.last
    diag.top_norm_bound = prev.top_norm_bound + diag.psi_top + diag.phi_top
    step_size = diag.psi_top + diag.phi_top
    # smallest Q with ||h_{k+1} - id|| <= ||h_k - id|| + Q (||phi - id|| + ||psi - id||)
    diag.composition_constant = (max(0.0, diag.h_norms[top] - prev.h_norms[top]) / step_size
                                 if step_size > 0 else 0.0)
    diag.conjugation_constant = _conjugation_constant(diag, top, fg_c1)
    params = cfg.params or _default_params(g.degree)
    diag.marking_depth = math.floor(cfg.tau * cfg.r * k / (2 * a * params.beta))
    diag.choice_lhs = 5 * (a + 1) * (k + 1)
    diag.choice_ok = bool(diag.choice_lhs <= diag.marking_depth)
    diag.cauchy = diffeo_gap(h_new, state.h)
    if oracle is not None:
        diag.oracle_error = oracle.error_of(h_new)
    # inductive checks
    if diag.node_residual > 1e-9:
        diag.violations.append(f"f_k - g on period-{k + 1} points is {diag.node_residual:.2e} > 1e-9")
    if not diag.rolle_ok:
        diag.violations.append(
            f"||f_k - g||_C0 = {diag.distance_c0:.3e} exceeds Lip * O_k = {diag.rolle_bound:.3e}")
    X = step_size * lam ** (cfg.tau * k)
    budget = X * lam ** (-cfg.tau * cfg.kappa0) / (1.0 - lam ** (-cfg.tau))
    if budget >= 0.5:
        diag.violations.append(f"X * sum Lambda^(-tau t) = {budget:.3e} >= 1/2")
    if cfg.strict and diag.violations:
        raise InductiveViolation(diag.violations[0], inequality=diag.violations[0])
    return ReconstructionState(k + 1, h_new, f_new, state.diagnostics + (diag,),
                               state.oracle_assisted or assisted)


@dataclass
class ReconstructionResult:
    h: object
    state: ReconstructionState
    converged: bool
    stop_reason: str
    oracle: ConjugacySample | None
    final_error: float
    decay_factor: float           # fitted per-step factor of the oracle error

    @property
    def diagnostics(self):
        return list(self.state.diagnostics)

    @property
    def oracle_assisted(self):
        return self.state.oracle_assisted


def fit_decay_factor(ks, errors, last=5, floor=1e-12):
    """Per-step geometric factor from a log-linear fit over the last ``last`` errors.

    The series is cut after the first error at or below ``floor``; that value
    is kept; it overstates the true error, so the fitted factor is an upper bound.
    """
    pairs = []
    for k, e in zip(ks, errors):
        if not np.isfinite(e):
            continue
        pairs.append((k, max(e, 1e-300)))
        if e <= floor:
            break
    pairs = pairs[-last:]
    if len(pairs) < 2:
        return math.nan
    kk, ee = zip(*pairs)
    slope = np.polyfit(np.asarray(kk, float), np.log(np.asarray(ee)), 1)[0]
    return float(math.exp(slope))


def run_scheme(f, g, config: ReconstructionConfig | None = None, oracle=True) -> ReconstructionResult:
    """Iterate :func:`scheme_step` from ``kappa0`` to ``max_k``.

    Stops early when ``||h_{k+1} - h_k||_{C^0}`` falls below ``cauchy_tol``
    (Cauchy exit) and raises :class:`NumericalFailure` when the oracle
    error fails to decrease for ``divergence_steps`` consecutive steps.
    """
    cfg = config or ReconstructionConfig()
    rf, rg = _check_pair(f, g)
    if not rg.near_linear:
        raise PreconditionError("g must be near the linear map")
    f, g = _as_conjugated(f), _as_conjugated(g)
    sample = conjugacy_oracle(f, g, cfg.oracle_depth) if oracle else None
    lam = rg.lambda_lower
    a = max(1.0, math.log(rg.omega_upper) / math.log(lam))
    spec_g = length_spectrum(g, cfg.max_k) if cfg.mode == "spectrum" else None
    w0 = initial_adjustment(f, g, cfg.kappa0, cfg.r)
    h0 = ComposedDiffeo([w0.h])
    f0 = ConjugatedMap(f, [w0.h])
    d0 = _diagnose(f0, g, h0, cfg.kappa0, cfg.r)
    fg_c1 = map_distance(f, g)[1]
    d0.top_norm_bound = d0.h_norms[cfg.r + 1]
    d0.conjugation_constant = _conjugation_constant(d0, cfg.r + 1, fg_c1)
    d0.whitney_notes = list(w0.notes)
    d0.marking = "order"
    d0.cauchy = diffeo_gap(h0, IdentityDiffeo())
    if sample is not None:
        d0.oracle_error = sample.error_of(h0)
    state = ReconstructionState(cfg.kappa0, h0, f0, (d0,))
    converged, reason = False, "max_k reached"
    rising = 0
    while state.k < cfg.max_k:
        state = scheme_step(f, g, state, cfg, spec_g, sample, lam, a, fg_c1)
        cur, prev = state.diagnostics[-1], state.diagnostics[-2]
        if sample is not None and cur.oracle_error >= prev.oracle_error and cur.oracle_error > 1e-12:
            rising += 1
            if rising >= cfg.divergence_steps:
                raise NumericalFailure(
                    f"oracle error did not decrease for {rising} consecutive steps (k = {state.k})")
        else:
            rising = 0
        if cur.cauchy < cfg.cauchy_tol:
            converged, reason = True, f"Cauchy exit at k = {state.k}"
            break
    errs = [d.oracle_error for d in state.diagnostics]
    ks = [d.k for d in state.diagnostics]
    return ReconstructionResult(state.h, state, converged or reason == "max_k reached", reason,
                                sample, errs[-1], fit_decay_factor(ks, errs))
