"""Orthonormal bases and membership tests for the subspaces driving size control.

The spaces computed here, all linear subspaces of n-space:

* ``span(X)`` -- the regression mean space;
* ``M0lin`` -- the null-restricted mean space ``{X b : R b = 0}``, dimension k-1;
* ``B`` -- the invariance set where the variance-estimator row vanishes,
  computed as the null space of the residual-maker rows at indices where
  v_i = R(X'X)^{-1}x_i' is nonzero;
* ``V#`` -- span of the standard basis vectors with index in the sharp set
  that additionally lie in ``B``;
* ``L#`` -- span of the union of ``M0lin`` and ``V#``.

All membership verdicts route through :meth:`SubspaceBasis.contains` so a
single tolerance governs them.  Index sets are reported 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecompositionFailure
from .model import TestProblem, span_basis_matrix
from .tolerances import TOL_BASIS, TOL_MEMBER, TOL_ZERO, rank_tolerance


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis Q (n x dim) of a labelled linear subspace."""

    Q: np.ndarray
    label: str

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def dim(self) -> int:
        return self.Q.shape[1]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of x onto the subspace."""
        if self.dim == 0:
            return np.zeros_like(x)
        return self.Q @ (self.Q.T @ x)

    def contains(self, x: np.ndarray, tol: float = TOL_MEMBER) -> bool:
        """Membership test: ||x - QQ'x|| <= tol * ||x||.  The zero vector is a member."""
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return True
        return float(np.linalg.norm(x - self.project(x))) <= tol * nx

    def contains_basis_vector(self, i: int, tol: float = TOL_MEMBER) -> bool:
        """Membership of the i-th (1-based) standard basis vector."""
        e = np.zeros(self.n)
        e[i - 1] = 1.0
        return self.contains(e, tol)


def orthonormal_basis(
    vectors: np.ndarray, label: str, n: int | None = None, atol: float = 0.0
) -> SubspaceBasis:
    """Orthonormal basis of the column span of ``vectors`` (SVD, rank-revealing).

    An empty generating set spans the zero subspace {0}.  ``atol`` is an
    absolute singular-value floor for callers whose generating set may be a
    noise-level zero matrix (a purely relative threshold would then keep
    noise directions).
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim == 1:
        vectors = vectors.reshape(-1, 1)
    if n is None:
        n = vectors.shape[0]
    if vectors.size == 0:
        return SubspaceBasis(Q=np.zeros((n, 0)), label=label)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] <= atol:
        return SubspaceBasis(Q=np.zeros((n, 0)), label=label)
    rank = int(np.sum(s > max(rank_tolerance(vectors.shape, s[0]), atol)))
    return SubspaceBasis(Q=u[:, :rank].copy(), label=label)


def null_space_basis(rows: np.ndarray, label: str) -> SubspaceBasis:
    """Orthonormal basis of the null space of a stack of row vectors."""
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[1]
    if rows.shape[0] == 0:
        return SubspaceBasis(Q=np.eye(n), label=label)
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > rank_tolerance(rows.shape, smax)))
    return SubspaceBasis(Q=vt[rank:].T.copy(), label=label)


def basis_span_x(problem: TestProblem) -> SubspaceBasis:
    """Orthonormal basis of span(X)."""
    return SubspaceBasis(Q=span_basis_matrix(problem), label="span(X)")


def compute_v_weights(problem: TestProblem) -> np.ndarray:
    """The restriction-leverage vector v with v_i = R(X'X)^{-1}x_i'.

    Computed as X(X'X)^{-1}R' through the SVD of X for numerical stability.
    """
    u, s, vt = np.linalg.svd(problem.X, full_matrices=False)
    return u @ ((vt @ problem.R) / s)


def sharp_set(problem: TestProblem, v: np.ndarray | None = None) -> frozenset[int]:
    """1-based indices where v_i is zero within tolerance (relative to max |v|).

    Always a proper subset of {1, ..., n} since R is nonzero.
    """
    if v is None:
        v = compute_v_weights(problem)
    scale = np.max(np.abs(v))
    return frozenset(int(i) + 1 for i in np.nonzero(np.abs(v) <= TOL_ZERO * scale)[0])


def basis_m0lin(problem: TestProblem) -> SubspaceBasis:
    """Orthonormal basis of {X b : R b = 0}; its dimension is k - 1."""
    # kernel of the 1 x k row R
    _, _, vt = np.linalg.svd(problem.R.reshape(1, -1), full_matrices=True)
    ker = vt[1:].T  # (k, k-1), orthonormal
    basis = orthonormal_basis(problem.X @ ker, "M0lin", n=problem.n)
    if basis.dim != problem.k - 1:
        raise DecompositionFailure(
            f"M0lin has dimension {basis.dim}, expected k-1={problem.k - 1}"
        )
    return basis


def basis_b(problem: TestProblem, v: np.ndarray | None = None) -> SubspaceBasis:
    """Orthonormal basis of the invariance set B.

    A vector y lies in B exactly when its residual vanishes at every index
    outside the sharp set, so B is the null space of those residual-maker rows.
    span(X) is always contained in B.
    """
    if v is None:
        v = compute_v_weights(problem)
    sharp = sharp_set(problem, v)
    active = [i for i in range(problem.n) if (i + 1) not in sharp]
    q = span_basis_matrix(problem)
    resid_maker = np.eye(problem.n) - q @ q.T
    return null_space_basis(resid_maker[active, :], "B")


def basis_v_sharp(
    problem: TestProblem,
    b: SubspaceBasis | None = None,
    sharp: frozenset[int] | None = None,
) -> SubspaceBasis:
    """Span of the standard basis vectors indexed by the sharp set that lie in B.

    The empty generating set spans {0}.
    """
    if sharp is None:
        sharp = sharp_set(problem)
    if b is None:
        b = basis_b(problem)
    members = sorted(i for i in sharp if b.contains_basis_vector(i))
    q = np.zeros((problem.n, len(members)))
    for col, i in enumerate(members):
        q[i - 1, col] = 1.0
    return SubspaceBasis(Q=q, label="V#")


def basis_l_sharp(
    problem: TestProblem,
    m0lin: SubspaceBasis | None = None,
    v_sharp: SubspaceBasis | None = None,
) -> SubspaceBasis:
    """Orthonormal basis of the sum space spanned by M0lin and V#."""
    if m0lin is None:
        m0lin = basis_m0lin(problem)
    if v_sharp is None:
        v_sharp = basis_v_sharp(problem)
    stacked = np.hstack([m0lin.Q, v_sharp.Q])
    return orthonormal_basis(stacked, "L#", n=problem.n)


@dataclass(frozen=True)
class IndexSets:
    """All 1-based index sets used by the size-control conditions."""

    i_sharp: frozenset[int]
    i0_m0lin: frozenset[int]
    i1_m0lin: frozenset[int]
    i0_lsharp: frozenset[int]
    i1_lsharp: frozenset[int]


def _membership_split(basis: SubspaceBasis, n: int) -> tuple[frozenset[int], frozenset[int]]:
    inside = frozenset(i for i in range(1, n + 1) if basis.contains_basis_vector(i))
    outside = frozenset(range(1, n + 1)) - inside
    return inside, outside


def index_sets(
    problem: TestProblem,
    m0lin: SubspaceBasis | None = None,
    l_sharp: SubspaceBasis | None = None,
) -> IndexSets:
    """Sharp set plus the I0/I1 partitions for M0lin and L#."""
    if m0lin is None:
        m0lin = basis_m0lin(problem)
    if l_sharp is None:
        l_sharp = basis_l_sharp(problem, m0lin=m0lin)
    i_sharp = sharp_set(problem)
    i0_m, i1_m = _membership_split(m0lin, problem.n)
    i0_l, i1_l = _membership_split(l_sharp, problem.n)
    return IndexSets(
        i_sharp=i_sharp,
        i0_m0lin=i0_m,
        i1_m0lin=i1_m,
        i0_lsharp=i0_l,
        i1_lsharp=i1_l,
    )


@dataclass(frozen=True)
class SubspaceBundle:
    """Every subspace artifact for one problem, computed once and shared."""

    v: np.ndarray
    span_x: SubspaceBasis
    m0lin: SubspaceBasis
    b: SubspaceBasis
    v_sharp: SubspaceBasis
    l_sharp: SubspaceBasis
    index: IndexSets


def analyze_subspaces(problem: TestProblem) -> SubspaceBundle:
    """Compute all bases and index sets coherently for one problem."""
    v = compute_v_weights(problem)
    span_x = basis_span_x(problem)
    m0lin = basis_m0lin(problem)
    b = basis_b(problem, v=v)
    sharp = sharp_set(problem, v)
    v_sharp = basis_v_sharp(problem, b=b, sharp=sharp)
    l_sharp = basis_l_sharp(problem, m0lin=m0lin, v_sharp=v_sharp)
    idx = index_sets(problem, m0lin=m0lin, l_sharp=l_sharp)
    return SubspaceBundle(
        v=v, span_x=span_x, m0lin=m0lin, b=b, v_sharp=v_sharp, l_sharp=l_sharp, index=idx
    )


@dataclass(frozen=True)
class DecompositionReport:
    """Result of verifying B = span(X) + residual part, an orthogonal sum."""

    dim_b: int
    dim_span_x: int
    residual_part: SubspaceBasis
    max_cross_inner: float
    max_reconstruction_error: float


def orthogonal_decomposition_check(problem: TestProblem) -> DecompositionReport:
    """Verify the orthogonal-sum structure of B and return the residual part.

    Checks dim(B) = k + dim(residual part), orthogonality of the two parts,
    and that every basis vector of B is recovered by its two projections.
    """
    b = basis_b(problem)
    span_x = basis_span_x(problem)
    q = span_x.Q
    resid_vectors = b.Q - q @ (q.T @ b.Q)
    # genuine residual directions of the orthogonal sum have singular value
    # exactly 1 (projection of an orthonormal basis), noise sits near eps
    res = orthonormal_basis(resid_vectors, "B_residual", n=problem.n, atol=1e-8)
    if b.dim != problem.k + res.dim:
        raise DecompositionFailure(
            f"dim(B)={b.dim} but span(X) part has dim {problem.k} and "
            f"residual part dim {res.dim}"
        )
    cross = 0.0 if res.dim == 0 else float(np.max(np.abs(q.T @ res.Q)))
    if cross > TOL_BASIS * 10:
        raise DecompositionFailure(f"parts are not orthogonal (max inner product {cross:.3e})")
    recon = b.Q - span_x.project(b.Q) - res.project(b.Q)
    max_err = float(np.max(np.abs(recon))) if recon.size else 0.0
    if max_err > TOL_BASIS * 10:
        raise DecompositionFailure(f"reconstruction failed (max error {max_err:.3e})")
    return DecompositionReport(
        dim_b=b.dim,
        dim_span_x=problem.k,
        residual_part=res,
        max_cross_inner=cross,
        max_reconstruction_error=max_err,
    )
