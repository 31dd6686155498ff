"""The robust test statistic, its variance estimator, and the critical-value lower bound.

The squared t-type statistic is (R b(y) - r)^2 / W(y) where W(y) is the
weighted sandwich variance estimate, with the convention that the statistic
is zero whenever W(y) vanishes.  W has the cheap representation
sum_i d_i (v_i u_i(y))^2 with v = X(X'X)^{-1}R' and u the residual vector; an
independent brute-force evaluator assembles the full sandwich matrix from its
definition and must agree with the cheap path to 1e-12 relative.

The lower bound C* is the maximum of the statistic over mu0 + e_i for i in
I1(M0lin); under the span(X)-form condition it can equivalently be computed
over the smaller set I1(L#).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditions import check_condition_uncorr
from .errors import DimensionMismatch, InvalidInput, InvarianceBreach, PreconditionUnverified
from .model import TestProblem, WeightScheme, resolve_weights, span_basis_matrix
from .subspaces import analyze_subspaces, compute_v_weights
from .tolerances import TOL_MEMBER, TOL_OMEGA

REL_TOL_INVARIANCE = 1e-8


@dataclass(frozen=True)
class StatContext:
    """Everything needed to evaluate the statistic repeatedly on one problem.

    Immutable and shareable across threads; batch evaluation over many y
    vectors parallelizes embarrassingly.
    """

    problem: TestProblem
    d: np.ndarray
    mu0: np.ndarray
    v: np.ndarray
    q_span: np.ndarray  # orthonormal basis of span(X), cached for residuals

    @property
    def n(self) -> int:
        return self.problem.n


def canonical_mu0(problem: TestProblem) -> np.ndarray:
    """The canonical null mean X R'(RR')^{-1} r; any null mean works by invariance."""
    beta0 = problem.R * (problem.r / float(problem.R @ problem.R))
    return problem.X @ beta0


def make_context(
    problem: TestProblem,
    scheme: WeightScheme | None = None,
    mu0: np.ndarray | None = None,
) -> StatContext:
    """Build a :class:`StatContext`; validates that mu0 is a null mean."""
    if scheme is None:
        scheme = WeightScheme("hc0")
    d = resolve_weights(scheme, problem)
    v = compute_v_weights(problem)
    q = span_basis_matrix(problem)
    if mu0 is None:
        mu0 = canonical_mu0(problem)
    else:
        mu0 = np.asarray(mu0, dtype=np.float64).reshape(-1)
        if mu0.shape[0] != problem.n:
            raise DimensionMismatch(f"mu0 has length {mu0.shape[0]}, expected n={problem.n}")
        scale = max(1.0, float(np.linalg.norm(mu0)))
        if abs(float(v @ mu0) - problem.r) > 1e-10 * max(scale, abs(problem.r), 1.0):
            raise InvalidInput("mu0 does not satisfy the null restriction")
        if float(np.linalg.norm(mu0 - q @ (q.T @ mu0))) > 1e-10 * scale:
            raise InvalidInput("mu0 does not lie in span(X)")
    return StatContext(problem=problem, d=d, mu0=mu0, v=v, q_span=q)


def _residual(ctx: StatContext, y: np.ndarray) -> np.ndarray:
    return y - ctx.q_span @ (ctx.q_span.T @ y)


def b_map(ctx: StatContext, y) -> np.ndarray:
    """Row vector of the variance estimator: entry i is v_i * u_i(y)."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    return ctx.v * _residual(ctx, y)


def omega_het(ctx: StatContext, y) -> float:
    """Weighted sandwich variance estimate, cheap path: sum_i d_i (v_i u_i)^2."""
    row = b_map(ctx, y)
    return float(np.sum(ctx.d * row * row))


def omega_het_brute(ctx: StatContext, y) -> float:
    """Brute-force oracle: assemble the full sandwich matrix from its definition.

    Forms (X'X)^{-1} X' diag(d_i u_i^2) X (X'X)^{-1} and contracts with R on
    both sides.  Shares no shortcut with :func:`omega_het`; used to guard
    against index slips.
    """
    X = ctx.problem.X
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    u = y - X @ beta
    meat = (X.T * (ctx.d * u * u)) @ X
    g = X.T @ X
    psi = np.linalg.solve(g, np.linalg.solve(g, meat).T).T
    return float(ctx.problem.R @ psi @ ctx.problem.R)


def numerator(ctx: StatContext, y) -> float:
    """R b(y) - r, via the precomputed v row."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    return float(ctx.v @ y) - ctx.problem.r


def t_het(ctx: StatContext, y) -> float:
    """The robust squared t-type statistic, zero on the vanishing-variance branch.

    The zero branch triggers when the variance estimate is at most
    TOL_OMEGA * (||v|| ||y||)^2; exact zeros (y in the invariance set) land
    there, and the threshold keeps pure float underflow from fabricating
    huge statistic values.
    """
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    om = omega_het(ctx, y)
    scale = float(np.linalg.norm(ctx.v)) * float(np.linalg.norm(y))
    if om <= TOL_OMEGA * scale * scale:
        return 0.0
    num = float(ctx.v @ y) - ctx.problem.r
    return num * num / om


def t_het_brute(ctx: StatContext, y) -> float:
    """Statistic via the brute-force sandwich assembly (test oracle)."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    om = omega_het_brute(ctx, y)
    scale = float(np.linalg.norm(ctx.v)) * float(np.linalg.norm(y))
    if om <= TOL_OMEGA * scale * scale:
        return 0.0
    X = ctx.problem.X
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    num = float(ctx.problem.R @ beta) - ctx.problem.r
    return num * num / om


@dataclass(frozen=True)
class CStarResult:
    """The critical-value lower bound and the 1-based indices achieving it."""

    value: float
    achieved_at: tuple[int, ...]


def _basis_vector(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i - 1] = 1.0
    return e


def c_star(ctx: StatContext, index_set: frozenset[int] | None = None) -> CStarResult:
    """Maximum of the statistic over mu0 + e_i for i in I1(M0lin).

    Any size-controlling critical value must be at least this value; the set
    I1(M0lin) is never empty.
    """
    if index_set is None:
        index_set = analyze_subspaces(ctx.problem).index.i1_m0lin
    indices = sorted(index_set)
    if not indices:
        raise InvalidInput("maximum over an empty index set")
    values = [t_het(ctx, ctx.mu0 + _basis_vector(ctx.n, i)) for i in indices]
    best = max(values)
    achieved = tuple(i for i, t in zip(indices, values) if t >= best - 1e-9 * max(best, 1e-300))
    return CStarResult(value=best, achieved_at=achieved)


def c_star_reduced(ctx: StatContext) -> float:
    """C* over the smaller index set I1(L#).

    The equality with :func:`c_star` is proven only under the span(X)-form
    condition, so calling this without it raises PreconditionUnverified.
    """
    bundle = analyze_subspaces(ctx.problem)
    if not check_condition_uncorr(ctx.problem, bundle=bundle).holds:
        raise PreconditionUnverified(
            "reduced lower-bound formula requires the span(X)-form condition to hold"
        )
    return c_star(ctx, index_set=bundle.index.i1_lsharp).value


@dataclass(frozen=True)
class InvarianceReport:
    """Maximal relative deviations observed across random invariance transforms."""

    trials: int
    max_group_deviation: float
    max_shift_deviation: float
    max_bmap_deviation: float


def _rel_dev(a: float, b: float) -> float:
    denom = max(abs(a), abs(b), 1e-12)
    return abs(a - b) / denom


def invariance_audit(ctx: StatContext, y, trials: int = 20, seed: int = 0) -> InvarianceReport:
    """Fuzz the invariances the theory rests on at a given evaluation point.

    For random nonzero scales delta and random null means m0, m0*, the
    statistic must be unchanged by y -> delta (y - m0) + m0*; it must also be
    unchanged by adding elements of L#, and the variance-estimator row must
    be unchanged by L#-shifts.  Deviations beyond 1e-8 relative raise
    InvarianceBreach naming the transform.
    """
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    rng = np.random.default_rng(seed)
    bundle = analyze_subspaces(ctx.problem)
    t_ref = t_het(ctx, y)
    b_ref = b_map(ctx, y)
    b_scale = max(float(np.max(np.abs(b_ref))), 1e-12)
    yscale = max(1.0, float(np.linalg.norm(y)))

    def null_mean() -> np.ndarray:
        if bundle.m0lin.dim == 0:
            return ctx.mu0.copy()
        coef = rng.standard_normal(bundle.m0lin.dim) * yscale
        return ctx.mu0 + bundle.m0lin.Q @ coef

    max_group = 0.0
    max_shift = 0.0
    max_bmap = 0.0
    for _ in range(trials):
        delta = float(rng.choice([-1.0, 1.0]) * np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
        y_group = delta * (y - null_mean()) + null_mean()
        dev = _rel_dev(t_het(ctx, y_group), t_ref)
        max_group = max(max_group, dev)
        if dev > REL_TOL_INVARIANCE:
            raise InvarianceBreach(
                f"group transform (delta={delta:.4g}) moved the statistic by {dev:.3e} relative"
            )
        if bundle.l_sharp.dim > 0:
            z = bundle.l_sharp.Q @ (rng.standard_normal(bundle.l_sharp.dim) * yscale)
        else:
            z = np.zeros(ctx.n)
        dev = _rel_dev(t_het(ctx, y + z), t_ref)
        max_shift = max(max_shift, dev)
        if dev > REL_TOL_INVARIANCE:
            raise InvarianceBreach(f"L#-shift moved the statistic by {dev:.3e} relative")
        bdev = float(np.max(np.abs(b_map(ctx, y + z) - b_ref))) / b_scale
        max_bmap = max(max_bmap, bdev)
        if bdev > REL_TOL_INVARIANCE:
            raise InvarianceBreach(f"L#-shift moved the variance row by {bdev:.3e} relative")
    return InvarianceReport(
        trials=trials,
        max_group_deviation=max_group,
        max_shift_deviation=max_shift,
        max_bmap_deviation=max_bmap,
    )
