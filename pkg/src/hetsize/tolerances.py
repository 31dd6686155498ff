"""Pinned numerical tolerances.

Every verdict-bearing comparison in the package routes through one of these
constants, so reports can state exactly which tolerances were in force and the
test suite pins them in a single place.
"""

import numpy as np

#: Leverage test for ``e_i in span(X)``: membership iff ``1 - h_i <= TOL_SPAN``
#: (equivalently ``||(I-H)e_i||^2 <= TOL_SPAN``; scale-free quadratic form).
TOL_SPAN = 1e-10

#: Zero test for entries of v = X(X'X)^{-1}R': zero iff |v_i| <= TOL_ZERO * max|v|.
TOL_ZERO = 1e-9

#: Subspace membership: ||x - QQ'x|| <= TOL_MEMBER * ||x||.
TOL_MEMBER = 1e-9

#: Zero-variance branch of the test statistic: treat the variance estimate as
#: zero when it is <= TOL_OMEGA * (||v|| * ||y||)^2.  Sits far above the
#: float64 rounding floor (~1e-31 on this scale) so exact-zero cases are
#: classified reliably, yet far below any genuine variance value arising at
#: the variance concentrations the worst-case search visits, so no real
#: rejection is censored.
TOL_OMEGA = 1e-20

#: Orthonormality / decomposition consistency checks.
TOL_BASIS = 1e-10

#: Relative offset above the critical-value lower bound used to evaluate the
#: one-sided limit defining the attainable-size threshold.
EPS_ALPHA = 1e-6

#: Default relative bracket width for critical-value bisection.
TOL_C = 1e-3

#: Overflow guard for the upper-bracket doubling search.
BRACKET_GUARD = 1e12


def rank_tolerance(shape: tuple[int, int], smax: float) -> float:
    """Rank-revealing singular value threshold: max(n,k) * eps * s_max."""
    return max(shape) * np.finfo(np.float64).eps * smax


def active_tolerances() -> dict[str, float]:
    """All pinned tolerances, for inclusion in reports."""
    return {
        "tol_span": TOL_SPAN,
        "tol_zero": TOL_ZERO,
        "tol_member": TOL_MEMBER,
        "tol_omega": TOL_OMEGA,
        "tol_basis": TOL_BASIS,
        "eps_alpha": EPS_ALPHA,
        "tol_c": TOL_C,
        "bracket_guard": BRACKET_GUARD,
        "rank_rule": "max(n,k) * eps * s_max",
    }
