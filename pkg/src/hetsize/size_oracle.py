"""Monte Carlo oracle for the worst-case null rejection probability.

Estimates the supremum over the heteroskedasticity model of the probability
that the statistic meets a critical value, by seeded common-random-numbers
Monte Carlo paired with multistart Nelder-Mead over a softmax-parametrized
simplex.  The error scale sigma is fixed to one: the statistic is invariant
under scaling around null means, so the supremum over sigma drops out
exactly, not approximately.

The supremum is driven by variance patterns concentrating near simplex
vertices, so near-vertex starts (at two depths) are always included next to
the barycenter and random Dirichlet starts.  One z batch is drawn per run and
reused across every variance pattern, making the objective a fixed
deterministic function; identical seed and config give bit-identical output,
serial or parallel.

The reported value is a lower bound for the true supremum (finite search,
finite samples); it is never a certificate.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .conditions import HetModel
from .errors import BadSimplexPoint, InvalidInput
from .statistic import StatContext, c_star
from .tolerances import EPS_ALPHA, TOL_OMEGA, TOL_ZERO

_SIMPLEX_SUM_TOL = 1e-10


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo and optimizer budget.

    ``n_restarts`` counts the random Dirichlet starts; the barycenter and the
    near-vertex starts (at depths concentration_eps and its square) are always
    added on top.  ``max_optimizer_iterations`` caps objective evaluations per
    start.
    """

    n_samples: int = 20_000
    n_restarts: int = 8
    seed: int = 0
    max_optimizer_iterations: int = 200
    concentration_eps: float = 1e-4

    def __post_init__(self):
        if self.n_samples < 1000:
            raise InvalidInput(f"n_samples must be >= 1000, got {self.n_samples}")
        if not 0.0 < self.concentration_eps < 1.0:
            raise InvalidInput("concentration_eps must lie in (0, 1)")
        if self.n_restarts < 0 or self.max_optimizer_iterations < 1:
            raise InvalidInput("n_restarts must be >= 0 and max_optimizer_iterations >= 1")


@dataclass(frozen=True)
class RejectionEstimate:
    """A rejection frequency with its binomial standard error."""

    value: float
    std_error: float


@dataclass(frozen=True)
class SizeEstimate:
    """Estimated worst-case size with the variance pattern achieving it.

    ``tau_sq_argmax`` is the block-mass point of the model simplex (length m);
    ``trace`` holds the best value found from each optimizer start.
    """

    value: float
    std_error: float
    tau_sq_argmax: tuple[float, ...]
    n_samples: int
    n_restarts: int
    trace: tuple[float, ...]


@dataclass(frozen=True)
class AlphaStarResult:
    """Worst-case size just above the lower bound C*, with the offset used."""

    estimate: SizeEstimate
    c_star: float
    c_evaluated: float
    eps_alpha: float

    @property
    def value(self) -> float:
        return self.estimate.value


def _binom_se(p: float, n: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / n))


def expand_tau_sq(model: HetModel, tau_sq) -> np.ndarray:
    """Expand block masses on the model simplex to per-observation variances.

    ``tau_sq[j]`` is the total variance mass of block j; within the block the
    variance is constant, tau_sq[j] / n_j.  Raises BadSimplexPoint unless all
    masses are positive and sum to one within 1e-10.
    """
    w = np.asarray(tau_sq, dtype=np.float64).reshape(-1)
    if w.shape[0] != model.m:
        raise BadSimplexPoint(f"variance pattern has length {w.shape[0]}, expected m={model.m}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0.0):
        raise BadSimplexPoint("variance masses must be finite and strictly positive")
    if abs(float(np.sum(w)) - 1.0) > _SIMPLEX_SUM_TOL:
        raise BadSimplexPoint(f"variance masses sum to {float(np.sum(w))!r}, expected 1")
    out = np.empty(model.n)
    for j, block in enumerate(model.blocks()):
        out[block.start : block.stop] = w[j] / model.sizes[j]
    return out


def _draw_batches(seed: int, n_samples: int, n: int):
    """One z batch plus an independent stream for Dirichlet starts."""
    z_ss, start_ss = np.random.SeedSequence(seed).spawn(2)
    z = np.random.default_rng(z_ss).standard_normal((n_samples, n))
    return z, np.random.default_rng(start_ss)


class _Frequency:
    """Rejection frequency of one z batch as a function of the variance pattern.

    Precomputes an augmented sample matrix [z | 1] so one tall-skinny matrix
    product per call yields the numerator and the active residuals with their
    constant offsets folded in.  The per-sample ||y||^2 needed by the
    zero-variance branch is only computed when some variance estimate is
    small enough for the branch to possibly matter.
    """

    def __init__(self, ctx: StatContext, model: HetModel, z: np.ndarray):
        self.model = model
        n = ctx.n
        v = ctx.v
        vmax = float(np.max(np.abs(v)))
        act = np.nonzero(np.abs(v) > TOL_ZERO * vmax)[0]
        q = ctx.q_span
        resid_maker = np.eye(n) - q @ q.T
        self.n = n
        self.v = v
        self.mu0 = ctx.mu0
        self.m_act_t = resid_maker[act, :].T.copy()  # (n, a)
        self.w_act = ctx.d[act] * v[act] ** 2
        self.num_const = float(v @ ctx.mu0) - ctx.problem.r
        self.u_const = ctx.mu0 @ self.m_act_t  # (a,), essentially zero
        self.vnorm_sq = float(v @ v)
        self.mu0_sq = float(ctx.mu0 @ ctx.mu0)
        self.mu0_norm = float(np.linalg.norm(ctx.mu0))
        self.n_samples = z.shape[0]
        aug = np.empty((self.n_samples, n + 1))
        aug[:, :n] = z
        aug[:, n] = 1.0
        self.z_aug = aug
        self.z_sq = z * z
        self.max_z_norm = float(np.sqrt(np.max(np.einsum("ij,ij->i", z, z))))

    def __call__(self, tau_sq_blocks, crit: float) -> float:
        if crit <= 0.0:
            return 1.0  # the statistic is nonnegative
        n = self.n
        tau_sq = expand_tau_sq(self.model, tau_sq_blocks)
        tau = np.sqrt(tau_sq)
        cols = np.empty((n + 1, self.m_act_t.shape[1] + 1))
        cols[:n, 0] = tau * self.v
        cols[n, 0] = self.num_const
        cols[:n, 1:] = tau[:, None] * self.m_act_t
        cols[n, 1:] = self.u_const
        # transposed product keeps each output row contiguous
        p = cols.T @ self.z_aug.T
        num = p[0]
        u = p[1:]
        om = np.einsum("js,js,j->s", u, u, self.w_act)
        hits = num * num >= crit * om
        # zero-variance branch: only worth a ||y||^2 pass if some om is small
        # enough that the branch could trigger for any sample at all
        y_norm_cap = self.mu0_norm + float(np.sqrt(np.max(tau_sq))) * self.max_z_norm
        floor = TOL_OMEGA * self.vnorm_sq
        if float(np.min(om)) <= floor * y_norm_cap * y_norm_cap:
            y_sq = self.mu0_sq + 2.0 * (self.z_aug[:, :n] @ (tau * self.mu0)) + self.z_sq @ tau_sq
            hits &= om > floor * y_sq
        return float(np.count_nonzero(hits)) / self.n_samples


def rejection_probability(ctx: StatContext, model: HetModel, tau_sq, crit: float,
                          mc: McConfig) -> RejectionEstimate:
    """Estimated null rejection probability at one variance pattern.

    Draws y = mu0 + tau * z with a seeded standard normal batch and returns
    the frequency of the statistic meeting ``crit``; the same seed yields the
    same z batch across calls, enabling common-random-number comparisons.
    """
    model.validate_for(ctx.n)
    z, _ = _draw_batches(mc.seed, mc.n_samples, ctx.n)
    freq = _Frequency(ctx, model, z)
    p = freq(tau_sq, crit)
    return RejectionEstimate(value=p, std_error=_binom_se(p, mc.n_samples))


def _w_from_theta(theta: np.ndarray) -> np.ndarray:
    full = np.append(theta, 0.0)
    full = full - np.max(full)
    e = np.exp(full)
    return e / np.sum(e)


def _theta_from_w(w: np.ndarray) -> np.ndarray:
    w = np.maximum(np.asarray(w, dtype=np.float64), 1e-300)
    return np.log(w[:-1]) - np.log(w[-1])


def _worker_count() -> int:
    raw = os.environ.get("HETSIZE_THREADS", "")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return min(8, os.cpu_count() or 1)


def _structured_starts(m: int, eps: float) -> list[np.ndarray]:
    starts = [np.full(m, 1.0 / m)]
    for depth in (eps, eps * eps):
        for j in range(m):
            w = np.full(m, depth / (m - 1))
            w[j] = 1.0 - depth
            starts.append(w)
    return starts


def worst_case_size(ctx: StatContext, model: HetModel, crit: float, mc: McConfig,
                    warm_starts: tuple = ()) -> SizeEstimate:
    """Maximize the rejection frequency over the model's variance simplex.

    Derivative-free local search (Nelder-Mead in softmax coordinates) from
    the barycenter, near-vertex starts for every block, random Dirichlet
    draws, and any caller-supplied warm starts; returns the best pattern
    found.  Restarts share one z batch and may run concurrently
    (HETSIZE_THREADS); results are identical either way.
    """
    model.validate_for(ctx.n)
    m = model.m
    z, start_rng = _draw_batches(mc.seed, mc.n_samples, ctx.n)
    freq = _Frequency(ctx, model, z)

    if m == 1 or crit <= 0.0:
        w0 = np.full(m, 1.0 / m)
        p = freq(w0, crit)
        return SizeEstimate(
            value=p,
            std_error=_binom_se(p, mc.n_samples),
            tau_sq_argmax=tuple(w0),
            n_samples=mc.n_samples,
            n_restarts=mc.n_restarts,
            trace=(p,),
        )

    starts = _structured_starts(m, mc.concentration_eps)
    if mc.n_restarts:
        draws = start_rng.dirichlet(np.ones(m), size=mc.n_restarts)
        starts.extend(np.maximum(d, 1e-12) / np.sum(np.maximum(d, 1e-12)) for d in draws)
    starts.extend(np.asarray(w, dtype=np.float64) for w in warm_starts)

    def run_start(w0: np.ndarray) -> tuple[float, np.ndarray]:
        theta0 = _theta_from_w(w0)
        simplex = np.vstack([theta0, theta0 + np.eye(m - 1)])
        res = minimize(
            lambda th: -freq(_w_from_theta(th), crit),
            theta0,
            method="Nelder-Mead",
            options={
                "maxfev": mc.max_optimizer_iterations,
                "initial_simplex": simplex,
                "xatol": 1e-2,
                "fatol": 1e-12,
            },
        )
        return -float(res.fun), _w_from_theta(res.x)

    workers = _worker_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_start, starts))
    else:
        results = [run_start(w0) for w0 in starts]

    best_idx = max(range(len(results)), key=lambda i: (results[i][0], -i))
    best_val, best_w = results[best_idx]
    return SizeEstimate(
        value=best_val,
        std_error=_binom_se(best_val, mc.n_samples),
        tau_sq_argmax=tuple(float(x) for x in best_w),
        n_samples=mc.n_samples,
        n_restarts=mc.n_restarts,
        trace=tuple(val for val, _ in results),
    )


def alpha_star(ctx: StatContext, model: HetModel, mc: McConfig,
               eps_alpha: float = EPS_ALPHA) -> AlphaStarResult:
    """Worst-case size evaluated just above the lower bound C*.

    The supremum over critical values above C* is the one-sided limit from
    the right (sizes fall in the critical value), approximated at
    C* (1 + eps_alpha); when C* is zero the probe is eps_alpha itself so the
    evaluation point stays strictly positive.
    """
    cs = c_star(ctx).value
    c_eval = cs * (1.0 + eps_alpha) if cs > 0.0 else eps_alpha
    est = worst_case_size(ctx, model, c_eval, mc)
    return AlphaStarResult(estimate=est, c_star=cs, c_evaluated=c_eval, eps_alpha=eps_alpha)
