"""Smallest size-controlling critical value via bracketing and bisection.

Worst-case size is non-increasing in the critical value, so the smallest
value bringing it under the target level is found by doubling up from the
lower bound C* and bisecting.  Monte Carlo noise can locally break
monotonicity of the estimated curve, so the bisection compares against the
level minus a three-standard-error guard band and returns the upper bracket
end: slight over-coverage is preferred to a silent size violation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .conditions import HetModel, decide_size_controllability
from .errors import BracketFailure, InvalidInput, NotControllable
from .size_oracle import McConfig, SizeEstimate, worst_case_size
from .statistic import StatContext, c_star
from .tolerances import BRACKET_GUARD, TOL_C

_VERIFY_SEED_OFFSET = 999_331


@dataclass(frozen=True)
class CriticalValueResult:
    """Outcome of the critical-value search.

    ``c_diamond`` is the returned critical value (upper end of the final
    bracket, hence conservative); it always satisfies c_diamond >= c_star.
    ``partition`` records the heteroskedasticity model searched, since the
    smallest critical values of different models need not coincide.
    """

    c_diamond: float
    alpha: float
    c_star: float
    achieved_size: SizeEstimate
    bracket: tuple[float, float]
    iterations: int
    partition: tuple[int, ...]


@dataclass(frozen=True)
class VerificationResult:
    """Independent re-check of a critical value at a fresh seed."""

    ok: bool
    crit: float
    alpha: float
    estimate: SizeEstimate


def _meets(est: SizeEstimate, alpha: float) -> bool:
    return est.value <= alpha - 3.0 * est.std_error


def smallest_critical_value(ctx: StatContext, model: HetModel | None, alpha: float,
                            mc: McConfig, tol_c: float = TOL_C) -> CriticalValueResult:
    """Smallest critical value whose estimated worst-case size is below alpha.

    Requires the size-controllability decision to be positive; otherwise no
    finite critical value works and NotControllable is raised (with the
    reason distinguishing a failed condition from a failed identifying
    assumption).  The bracket starts at C*; the upper end is found by
    doubling from max(1, 2 C*) until the guarded size target is met.

    Each oracle call reuses the seed-determined z batch, and the incumbent
    worst-case pattern warm-starts the next call.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha}")
    if model is None:
        model = HetModel.per_observation(ctx.n)
    report = decide_size_controllability(ctx.problem, model)
    if report.status == "assumption-violated":
        raise NotControllable(
            "identifying assumption fails: the statistic is degenerate and the "
            "size-control theory does not apply",
            reason="assumption-violated",
        )
    if not report.size_controllable:
        raise NotControllable(
            "size-control condition fails: worst-case size is 1 for every "
            "finite critical value",
            reason="condition-violated",
        )

    cs = c_star(ctx).value
    calls = 0
    warm: tuple = ()

    def oracle(crit: float) -> SizeEstimate:
        nonlocal calls, warm
        calls += 1
        est = worst_case_size(ctx, model, crit, mc, warm_starts=warm)
        warm = (np.asarray(est.tau_sq_argmax),)
        return est

    high = max(1.0, 2.0 * cs)
    est_high = oracle(high)
    while not _meets(est_high, alpha):
        high *= 2.0
        if high > BRACKET_GUARD:
            raise BracketFailure(
                f"no critical value below {BRACKET_GUARD:g} met the size target; "
                "oracle or condition inconsistency"
            )
        est_high = oracle(high)

    low = cs
    tol = tol_c * max(1.0, cs)
    while high - low > tol:
        mid = 0.5 * (low + high)
        est_mid = oracle(mid)
        if _meets(est_mid, alpha):
            high, est_high = mid, est_mid
        else:
            low = mid
    return CriticalValueResult(
        c_diamond=high,
        alpha=alpha,
        c_star=cs,
        achieved_size=est_high,
        bracket=(low, high),
        iterations=calls,
        partition=model.sizes,
    )


def verify_size_control(ctx: StatContext, model: HetModel | None, crit: float, alpha: float,
                        mc: McConfig) -> VerificationResult:
    """Re-estimate worst-case size at ``crit`` with a fresh seed and doubled budget.

    Passes when the independent estimate is at most alpha plus three standard
    errors.
    """
    if model is None:
        model = HetModel.per_observation(ctx.n)
    mc_fresh = replace(mc, seed=mc.seed + _VERIFY_SEED_OFFSET, n_samples=2 * mc.n_samples)
    est = worst_case_size(ctx, model, crit, mc_fresh)
    ok = est.value <= alpha + 3.0 * est.std_error
    return VerificationResult(ok=ok, crit=crit, alpha=alpha, estimate=est)
