"""Size-controllability conditions and their equivalent forms.

Implements the identifying assumption on (R, X), the single-index conditions
(one in terms of span(X), a stronger one in terms of the invariance set B),
their group-heteroskedasticity generalizations, and a battery of equivalent
formulations evaluated through independent code paths so the equivalences act
as internal cross-checks.

Verdict semantics: under the identifying assumption, the span(X)-form
condition is necessary AND sufficient for the existence of a finite
size-controlling critical value when a single restriction is tested; when it
fails, worst-case size is 1 for every critical value.  When the assumption
itself fails the theory does not apply and the report says so instead of
guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .errors import BadPartition, EquivalenceBreach
from .model import TestProblem, hat_diagnostics, span_basis_matrix
from .subspaces import (
    SubspaceBundle,
    analyze_subspaces,
    compute_v_weights,
)
from .tolerances import TOL_MEMBER, TOL_SPAN, TOL_ZERO


@dataclass(frozen=True)
class HetModel:
    """Block-constant heteroskedasticity model given by group sizes (n_1, ..., n_m).

    Variances are constant within consecutive blocks; m = n with all sizes 1
    recovers the fully unrestricted heteroskedasticity model.
    """

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise BadPartition(f"group sizes must be positive integers, got {self.sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def per_observation(cls, n: int) -> "HetModel":
        """The all-ones partition: one block per observation."""
        return cls(sizes=(1,) * n)

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def validate_for(self, n: int) -> None:
        if self.n != n:
            raise BadPartition(f"group sizes sum to {self.n}, expected n={n}")

    def blocks(self) -> list[range]:
        """0-based index ranges of the blocks."""
        upper = list(accumulate(self.sizes))
        lower = [0] + upper[:-1]
        return [range(lo, hi) for lo, hi in zip(lower, upper)]


@dataclass(frozen=True)
class ConditionCheck:
    """A verdict plus the 1-based indices (or block numbers) violating it."""

    holds: bool
    witnesses: tuple[int, ...] = ()


def check_assumption(problem: TestProblem, diag=None, v: np.ndarray | None = None) -> bool:
    """Identifying assumption on (R, X).

    Delete from X' the columns whose index has a leverage-one observation;
    the assumption holds when R(X'X)^{-1} applied to the surviving part is
    nonzero.  Equivalently: v_i is nonzero for some i outside the
    leverage-one set.
    """
    if diag is None:
        diag = hat_diagnostics(problem)
    if v is None:
        v = compute_v_weights(problem)
    keep = [i for i in range(problem.n) if (i + 1) not in diag.in_span]
    surviving = v[keep]  # row of R(X'X)^{-1} X'(not deleted)
    return surviving.size > 0 and float(np.max(np.abs(surviving))) > TOL_ZERO * float(
        np.max(np.abs(v))
    )


def check_condition_uncorr(problem: TestProblem, bundle: SubspaceBundle | None = None,
                           diag=None) -> ConditionCheck:
    """No standard basis vector indexed by I1(M0lin) lies in span(X).

    Membership via leverage: e_i in span(X) iff h_i = 1 within tolerance.
    """
    if bundle is None:
        bundle = analyze_subspaces(problem)
    if diag is None:
        diag = hat_diagnostics(problem)
    violators = tuple(sorted(bundle.index.i1_m0lin & diag.in_span))
    return ConditionCheck(holds=not violators, witnesses=violators)


def check_condition_het(problem: TestProblem, bundle: SubspaceBundle | None = None) -> ConditionCheck:
    """No standard basis vector indexed by I1(M0lin) lies in the invariance set B."""
    if bundle is None:
        bundle = analyze_subspaces(problem)
    violators = tuple(
        sorted(i for i in bundle.index.i1_m0lin if bundle.b.contains_basis_vector(i))
    )
    return ConditionCheck(holds=not violators, witnesses=violators)


@dataclass(frozen=True)
class EquivalentForms:
    """Six independently evaluated forms of the span(X) size-control condition.

    uncorr      : e_i not in span(X) for every i in I1(M0lin)
    sol0        : e_i not in span(X) for every i with v_i != 0
    sol         : h_i < 1 for every i with v_i != 0
    simpl       : e_i not in span(X) for every i in I1(L#)
    b_lsharp    : e_i not in B for every i in I1(L#)
    b_sharp_c   : e_i not in B for every i outside the sharp set
    """

    uncorr: bool
    sol0: bool
    sol: bool
    simpl: bool
    b_lsharp: bool
    b_sharp_c: bool

    def as_tuple(self) -> tuple[bool, ...]:
        return (self.uncorr, self.sol0, self.sol, self.simpl, self.b_lsharp, self.b_sharp_c)

    @property
    def agree(self) -> bool:
        return len(set(self.as_tuple())) == 1


def check_equivalent_forms(problem: TestProblem,
                           bundle: SubspaceBundle | None = None) -> EquivalentForms:
    """Evaluate all six forms through independent routes and assert they coincide.

    Raises
    ------
    EquivalenceBreach
        If any two forms disagree; the exception carries the verdict tuple.
        Disagreement signals a tolerance-induced inconsistency and is never
        silently reconciled.
    """
    if bundle is None:
        bundle = analyze_subspaces(problem)
    n = problem.n
    v = bundle.v
    vmax = float(np.max(np.abs(v)))
    nonzero_v = [i for i in range(1, n + 1) if abs(v[i - 1]) > TOL_ZERO * vmax]
    h = hat_diagnostics(problem).h
    q = span_basis_matrix(problem)
    resid_maker = np.eye(n) - q @ q.T

    # route 1: basis-projection membership in span(X), index set from M0lin basis
    f_uncorr = all(
        not bundle.span_x.contains_basis_vector(i) for i in sorted(bundle.index.i1_m0lin)
    )
    # route 2: residual-norm membership in span(X), index set from v directly
    f_sol0 = all(float(np.sum(resid_maker[:, i - 1] ** 2)) > TOL_SPAN for i in nonzero_v)
    # route 3: leverage form
    f_sol = all(h[i - 1] < 1.0 - TOL_SPAN for i in nonzero_v)
    # route 4: leverage membership, index set from the L# basis
    f_simpl = all(1.0 - h[i - 1] > TOL_SPAN for i in sorted(bundle.index.i1_lsharp))
    # route 5: B membership via its orthonormal basis, over I1(L#)
    f_b_lsharp = all(
        not bundle.b.contains_basis_vector(i) for i in sorted(bundle.index.i1_lsharp)
    )
    # route 6: B membership via direct evaluation of the variance-estimator row
    def in_b_by_map(i: int) -> bool:
        u = resid_maker[:, i - 1]
        return float(np.max(np.abs(v * u))) <= TOL_MEMBER * vmax

    f_b_sharp_c = all(not in_b_by_map(i) for i in nonzero_v)

    forms = EquivalentForms(
        uncorr=f_uncorr,
        sol0=f_sol0,
        sol=f_sol,
        simpl=f_simpl,
        b_lsharp=f_b_lsharp,
        b_sharp_c=f_b_sharp_c,
    )
    if not forms.agree:
        raise EquivalenceBreach(
            f"equivalent condition forms disagree: {forms.as_tuple()}", forms=forms
        )
    return forms


@dataclass(frozen=True)
class GroupConditionCheck:
    """Verdicts of the group conditions; witnesses are 1-based block numbers."""

    cond_group: ConditionCheck
    cond_group_uncorr: ConditionCheck


def check_group_conditions(problem: TestProblem, model: HetModel,
                           bundle: SubspaceBundle | None = None,
                           diag=None) -> GroupConditionCheck:
    """Evaluate both group-heteroskedasticity conditions block by block.

    The first requires, for every block meeting I1(L#), that some basis
    vector of the block escapes B; the second requires, for every block whose
    I1(L#)-part is nonempty and disjoint from the sharp set, that some basis
    vector of that part escapes span(X).  Blocks failing the respective
    filter are skipped; if no block qualifies the condition holds vacuously.
    Non-inclusion of a span of standard basis vectors in a linear space
    reduces to some single vector escaping it.
    """
    model.validate_for(problem.n)
    if bundle is None:
        bundle = analyze_subspaces(problem)
    if diag is None:
        diag = hat_diagnostics(problem)
    i1_lsharp = bundle.index.i1_lsharp
    sharp = bundle.index.i_sharp

    group_witnesses = []
    uncorr_witnesses = []
    for j, block in enumerate(model.blocks(), start=1):
        members = frozenset(i + 1 for i in block)
        meet = members & i1_lsharp
        if meet:
            if not any(not bundle.b.contains_basis_vector(i) for i in sorted(members)):
                group_witnesses.append(j)
            if not (meet & sharp):
                if not any(i not in diag.in_span for i in sorted(meet)):
                    uncorr_witnesses.append(j)
    return GroupConditionCheck(
        cond_group=ConditionCheck(holds=not group_witnesses, witnesses=tuple(group_witnesses)),
        cond_group_uncorr=ConditionCheck(
            holds=not uncorr_witnesses, witnesses=tuple(uncorr_witnesses)
        ),
    )


@dataclass(frozen=True)
class ConditionReport:
    """Full verdict sheet for one (problem, heteroskedasticity model) pair.

    ``status`` is one of ``"controllable"``, ``"not-controllable"``,
    ``"assumption-violated"``; ``size_controllable`` is None in the last case
    because the underlying theorem then does not apply.
    """

    assumption_ok: bool
    cond_uncorr: ConditionCheck
    cond_het: ConditionCheck
    cond_group: ConditionCheck
    cond_group_uncorr: ConditionCheck
    equivalent_forms_agree: bool
    size_controllable: bool | None
    status: str
    partition: tuple[int, ...]


def decide_size_controllability(problem: TestProblem,
                                model: HetModel | None = None,
                                bundle: SubspaceBundle | None = None) -> ConditionReport:
    """Decide existence of a finite size-controlling critical value.

    For the per-observation model the decision is the span(X)-form condition;
    for coarser partitions it is the group condition (whose two forms must
    agree).  All sub-verdicts are carried in the report.
    """
    if model is None:
        model = HetModel.per_observation(problem.n)
    model.validate_for(problem.n)
    if bundle is None:
        bundle = analyze_subspaces(problem)
    diag = hat_diagnostics(problem)
    assumption_ok = check_assumption(problem, diag=diag, v=bundle.v)
    forms = check_equivalent_forms(problem, bundle=bundle)
    uncorr = check_condition_uncorr(problem, bundle=bundle, diag=diag)
    het = check_condition_het(problem, bundle=bundle)
    group = check_group_conditions(problem, model, bundle=bundle, diag=diag)
    if group.cond_group.holds != group.cond_group_uncorr.holds:
        raise EquivalenceBreach(
            "group condition forms disagree: "
            f"{group.cond_group.holds} vs {group.cond_group_uncorr.holds}"
        )
    per_observation = model.m == problem.n
    if per_observation and group.cond_group_uncorr.holds != uncorr.holds:
        raise EquivalenceBreach(
            "per-observation group condition does not reduce to the single-index condition"
        )
    if not assumption_ok:
        controllable, status = None, "assumption-violated"
    else:
        controllable = uncorr.holds if per_observation else group.cond_group.holds
        status = "controllable" if controllable else "not-controllable"
    return ConditionReport(
        assumption_ok=assumption_ok,
        cond_uncorr=uncorr,
        cond_het=het,
        cond_group=group.cond_group,
        cond_group_uncorr=group.cond_group_uncorr,
        equivalent_forms_agree=forms.agree,
        size_controllable=controllable,
        status=status,
        partition=model.sizes,
    )
