"""Testing problem, validation, hat-matrix diagnostics, and HC weight schemes.

The problem is a fixed design matrix X (n x k, full column rank), a single
restriction row R (length k, nonzero), and a scalar right-hand side r.  All
types are immutable after construction and all operations are pure functions.

Observation indices reported by this package are 1-based throughout, matching
the usual statistical convention for naming observations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidInput,
    NonpositiveWeight,
    RankDeficient,
    TooFewObservations,
    ZeroRestriction,
)
from .tolerances import TOL_SPAN, rank_tolerance

logger = logging.getLogger("hetsize")

HC_KINDS = ("hc0", "hc1", "hc2", "hc3", "hc4", "custom")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TestProblem:
    """A validated single-restriction testing problem.

    Attributes
    ----------
    X : ndarray, shape (n, k)
        Design matrix, full column rank.
    R : ndarray, shape (k,)
        Restriction row vector, nonzero.
    r : float
        Right-hand side of the null hypothesis R beta = r.
    """

    X: np.ndarray
    R: np.ndarray
    r: float

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


def validate_problem(X, R, r: float = 0.0) -> TestProblem:
    """Validate inputs and build a :class:`TestProblem`.

    Raises
    ------
    DimensionMismatch, InvalidInput, TooFewObservations, ZeroRestriction,
    RankDeficient
        In that order of checking.
    """
    X = np.asarray(X, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64).reshape(-1)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-dimensional, got ndim={X.ndim}")
    n, k = X.shape
    if R.shape[0] != k:
        raise DimensionMismatch(f"R has length {R.shape[0]}, expected k={k}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(R)) and np.isfinite(r)):
        raise InvalidInput("X, R, r must be finite")
    if not 1 <= k < n:
        raise TooFewObservations(f"need 1 <= k < n, got n={n}, k={k}")
    if np.max(np.abs(R)) == 0.0:
        raise ZeroRestriction("restriction vector R is zero")
    s = np.linalg.svd(X, compute_uv=False)
    if s[-1] <= rank_tolerance((n, k), s[0]):
        raise RankDeficient(
            f"design matrix has numerical rank < k={k} (smallest singular value {s[-1]:.3e})"
        )
    return TestProblem(X=_readonly(X), R=_readonly(R), r=float(r))


def span_basis_matrix(problem: TestProblem) -> np.ndarray:
    """Orthonormal basis of span(X) as an (n, k) matrix, via SVD."""
    u, s, _ = np.linalg.svd(problem.X, full_matrices=False)
    # validate_problem guarantees rank k, so all k left singular vectors count
    return u[:, : problem.k]


@dataclass(frozen=True)
class HatDiagnostics:
    """Leverages and the leverage-one index set.

    ``h[i]`` is the i-th diagonal entry of the projection onto span(X);
    ``in_span`` holds the 1-based observation numbers with h_i = 1 within
    tolerance, i.e. those whose standard basis vector lies in span(X).
    """

    h: np.ndarray
    in_span: frozenset[int]


def hat_diagnostics(problem: TestProblem) -> HatDiagnostics:
    """Leverages h_i = e_i' H e_i and the indices with e_i in span(X)."""
    q = span_basis_matrix(problem)
    h = np.einsum("ij,ij->i", q, q)
    in_span = frozenset(int(i) + 1 for i in np.nonzero(1.0 - h <= TOL_SPAN)[0])
    return HatDiagnostics(h=_readonly(h), in_span=in_span)


def residual(problem: TestProblem, y) -> np.ndarray:
    """Least-squares residual (I - H) y."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != problem.n:
        raise DimensionMismatch(f"y has length {y.shape[0]}, expected n={problem.n}")
    q = span_basis_matrix(problem)
    return y - q @ (q.T @ y)


@dataclass(frozen=True)
class WeightScheme:
    """HC weight family: one of hc0..hc4, or a custom positive vector."""

    kind: str = "hc0"
    custom_d: np.ndarray | None = field(default=None)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in HC_KINDS:
            raise InvalidInput(f"unknown weight scheme {self.kind!r}; expected one of {HC_KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind == "custom":
            if self.custom_d is None:
                raise InvalidInput("custom weight scheme requires custom_d")
            object.__setattr__(self, "custom_d", _readonly(np.asarray(self.custom_d).reshape(-1)))
        elif self.custom_d is not None:
            raise InvalidInput("custom_d only allowed with kind='custom'")


def resolve_weights(scheme: WeightScheme, problem: TestProblem) -> np.ndarray:
    """Resolve a weight scheme to the positive vector d of length n.

    hc0: 1; hc1: n/(n-k); hc2: (1-h_i)^-1; hc3: (1-h_i)^-2;
    hc4: (1-h_i)^-delta_i with delta_i = min(4, n h_i / k).

    For observations with h_i = 1 within tolerance the residual is
    identically zero, so the weight cannot affect the variance estimate;
    those entries are set to 1 to avoid a division by zero.
    """
    n, k = problem.n, problem.k
    if scheme.kind == "custom":
        d = np.asarray(scheme.custom_d, dtype=np.float64)
        if d.shape[0] != n:
            raise DimensionMismatch(f"custom weights have length {d.shape[0]}, expected n={n}")
        if np.any(~np.isfinite(d)) or np.any(d <= 0.0):
            raise NonpositiveWeight("custom weights must be finite and strictly positive")
        return d.copy()
    if scheme.kind == "hc0":
        return np.ones(n)
    if scheme.kind == "hc1":
        return np.full(n, n / (n - k))
    diag = hat_diagnostics(problem)
    h = diag.h.copy()
    capped = np.array(sorted(diag.in_span), dtype=int) - 1
    if capped.size:
        logger.info(
            "weights %s: observations %s have leverage one; their residuals vanish "
            "identically, setting d_i = 1 there",
            scheme.kind,
            [int(i) + 1 for i in capped],
        )
        h[capped] = 0.0  # placeholder leverage so the formula yields d = 1
    one_minus = 1.0 - h
    if scheme.kind == "hc2":
        d = one_minus**-1.0
    elif scheme.kind == "hc3":
        d = one_minus**-2.0
    else:  # hc4
        delta = np.minimum(4.0, n * h / k)
        d = one_minus**-delta
    d[capped] = 1.0
    return d
