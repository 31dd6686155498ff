"""Worked-design corpus with documented expected diagnostics.

Six designs, two of which carry a parameter r3 (the last entry of the
restriction row) whose zero/nonzero regimes behave differently, giving eight
named instances in total.  Each instance attaches the diagnostics its source
states: sharp set, I1(M0lin), the dimension of the invariance set B and which
standard basis vectors it contains, the identifying-assumption verdict, both
condition verdicts, size controllability, and the residual part of the
orthogonal decomposition of B.  Tests re-derive everything from the live
pipeline and compare against these expectations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .model import TestProblem, validate_problem


@dataclass(frozen=True)
class FixtureExpectations:
    """Documented diagnostics for one fixture instance (1-based indices)."""

    in_span: frozenset[int]
    i_sharp: frozenset[int]
    i1_m0lin: frozenset[int]
    i1_lsharp: frozenset[int]
    dim_b: int
    b_contains: frozenset[int]
    dim_v_sharp: int
    dim_l_sharp: int
    assumption_ok: bool
    cond_uncorr: bool
    cond_uncorr_witnesses: frozenset[int]
    cond_het: bool
    cond_het_witnesses: frozenset[int]
    size_controllable: bool
    residual_dim: int
    residual_span: tuple[float, ...] | None = None  # a spanning vector, when 1-dim
    c_star_hc0: float | None = None
    c_star_achievers_hc0: frozenset[int] = field(default_factory=frozenset)


@dataclass(frozen=True)
class Fixture:
    name: str
    family: str
    description: str
    problem: TestProblem
    expected: FixtureExpectations


def _cols(*columns) -> np.ndarray:
    return np.column_stack([np.asarray(c, dtype=np.float64) for c in columns])


def _a1() -> Fixture:
    problem = validate_problem(
        _cols([1, 1, 1, 1], [1, -1, 1, -1]), [1.0, 1.0], 0.0
    )
    return Fixture(
        name="A1",
        family="A1",
        description="n=4, k=2, alternating second column, R=(1,1); "
        "span(X)-form condition holds while the B-form fails",
        problem=problem,
        expected=FixtureExpectations(
            in_span=frozenset(),
            i_sharp=frozenset({2, 4}),
            i1_m0lin=frozenset({1, 2, 3, 4}),
            i1_lsharp=frozenset({1, 3}),
            dim_b=3,
            b_contains=frozenset({2, 4}),
            dim_v_sharp=2,
            dim_l_sharp=2,
            assumption_ok=True,
            cond_uncorr=True,
            cond_uncorr_witnesses=frozenset(),
            cond_het=False,
            cond_het_witnesses=frozenset({2, 4}),
            size_controllable=True,
            residual_dim=1,
            residual_span=(0.0, 1.0, 0.0, -1.0),
            c_star_hc0=2.0,
            c_star_achievers_hc0=frozenset({1, 3}),
        ),
    )


def _a2(r3: float) -> Fixture:
    problem = validate_problem(
        _cols([1, 1, 1, 1, 0], [1, -1, 1, -1, 0], [0, 0, 0, 0, 2]),
        [1.0, 1.0, r3],
        0.0,
    )
    if r3 == 0.0:
        expected = FixtureExpectations(
            in_span=frozenset({5}),
            i_sharp=frozenset({2, 4, 5}),
            i1_m0lin=frozenset({1, 2, 3, 4}),
            i1_lsharp=frozenset({1, 3}),
            dim_b=4,
            b_contains=frozenset({2, 4, 5}),
            dim_v_sharp=3,
            dim_l_sharp=3,
            assumption_ok=True,
            cond_uncorr=True,
            cond_uncorr_witnesses=frozenset(),
            cond_het=False,
            cond_het_witnesses=frozenset({2, 4}),
            size_controllable=True,
            residual_dim=1,
            residual_span=(0.0, 1.0, 0.0, -1.0, 0.0),
        )
    else:
        expected = FixtureExpectations(
            in_span=frozenset({5}),
            i_sharp=frozenset({2, 4}),
            i1_m0lin=frozenset({1, 2, 3, 4, 5}),
            i1_lsharp=frozenset({1, 3, 5}),
            dim_b=4,
            b_contains=frozenset({2, 4, 5}),
            dim_v_sharp=2,
            dim_l_sharp=3,
            assumption_ok=True,
            cond_uncorr=False,
            cond_uncorr_witnesses=frozenset({5}),
            cond_het=False,
            cond_het_witnesses=frozenset({2, 4, 5}),
            size_controllable=False,
            residual_dim=1,
            residual_span=(0.0, 1.0, 0.0, -1.0, 0.0),
        )
    tag = "r0" if r3 == 0.0 else "r1"
    return Fixture(
        name=f"A2-{tag}",
        family="A2",
        description=f"n=5, k=3, leverage-one fifth observation, R=(1,1,{r3:g})",
        problem=problem,
        expected=expected,
    )


def _a3() -> Fixture:
    problem = validate_problem(
        _cols([1, 1, 1, 1, 0], [1, -1, 1, -1, 0]), [1.0, 0.0], 0.0
    )
    return Fixture(
        name="A3",
        family="A3",
        description="n=5, k=2, zero fifth row, R=(1,0); e_5 spans the extra "
        "invariance direction",
        problem=problem,
        expected=FixtureExpectations(
            in_span=frozenset(),
            i_sharp=frozenset({5}),
            i1_m0lin=frozenset({1, 2, 3, 4, 5}),
            i1_lsharp=frozenset({1, 2, 3, 4}),
            dim_b=3,
            b_contains=frozenset({5}),
            dim_v_sharp=1,
            dim_l_sharp=2,
            assumption_ok=True,
            cond_uncorr=True,
            cond_uncorr_witnesses=frozenset(),
            cond_het=False,
            cond_het_witnesses=frozenset({5}),
            size_controllable=True,
            residual_dim=1,
            residual_span=(0.0, 0.0, 0.0, 0.0, 1.0),
        ),
    )


def _a4(r3: float) -> Fixture:
    problem = validate_problem(
        _cols([1, 1, 1, 1, 0, 0], [1, -1, 1, -1, 0, 0], [0, 0, 0, 0, 0, 2]),
        [1.0, 0.0, r3],
        0.0,
    )
    if r3 == 0.0:
        expected = FixtureExpectations(
            in_span=frozenset({6}),
            i_sharp=frozenset({5, 6}),
            i1_m0lin=frozenset({1, 2, 3, 4, 5}),
            i1_lsharp=frozenset({1, 2, 3, 4}),
            dim_b=4,
            b_contains=frozenset({5, 6}),
            dim_v_sharp=2,
            dim_l_sharp=3,
            assumption_ok=True,
            cond_uncorr=True,
            cond_uncorr_witnesses=frozenset(),
            cond_het=False,
            cond_het_witnesses=frozenset({5}),
            size_controllable=True,
            residual_dim=1,
            residual_span=(0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
        )
    else:
        expected = FixtureExpectations(
            in_span=frozenset({6}),
            i_sharp=frozenset({5}),
            i1_m0lin=frozenset({1, 2, 3, 4, 5, 6}),
            i1_lsharp=frozenset({1, 2, 3, 4, 6}),
            dim_b=4,
            b_contains=frozenset({5, 6}),
            dim_v_sharp=1,
            dim_l_sharp=3,
            assumption_ok=True,
            cond_uncorr=False,
            cond_uncorr_witnesses=frozenset({6}),
            cond_het=False,
            cond_het_witnesses=frozenset({5, 6}),
            size_controllable=False,
            residual_dim=1,
            residual_span=(0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
        )
    tag = "r0" if r3 == 0.0 else "r1"
    return Fixture(
        name=f"A4-{tag}",
        family="A4",
        description=f"n=6, k=3, zero fifth row and leverage-one sixth, R=(1,0,{r3:g})",
        problem=problem,
        expected=expected,
    )


def _remark_a1iv() -> Fixture:
    problem = validate_problem(
        _cols([1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1]), [1.0, 1.0, 0.0], 0.0
    )
    return Fixture(
        name="remark-a1iv",
        family="remark-a1iv",
        description="n=4, k=3 (k=n-1), R=(1,1,0); the invariance set collapses "
        "to span(X) despite a nonempty sharp set",
        problem=problem,
        expected=FixtureExpectations(
            in_span=frozenset(),
            i_sharp=frozenset({2, 4}),
            i1_m0lin=frozenset({1, 2, 3, 4}),
            i1_lsharp=frozenset({1, 2, 3, 4}),
            dim_b=3,
            b_contains=frozenset(),
            dim_v_sharp=0,
            dim_l_sharp=2,
            assumption_ok=True,
            cond_uncorr=True,
            cond_uncorr_witnesses=frozenset(),
            cond_het=True,
            cond_het_witnesses=frozenset(),
            size_controllable=True,
            residual_dim=0,
        ),
    )


def _two_group() -> Fixture:
    problem = validate_problem(
        _cols([1, 1, 0, 0], [0, 0, 1, 1]), [1.0, 0.0], 0.0
    )
    return Fixture(
        name="two-group",
        family="two-group",
        description="two-group means design (n1=n2=2), testing the first group "
        "mean; controllable although B exceeds span(X)",
        problem=problem,
        expected=FixtureExpectations(
            in_span=frozenset(),
            i_sharp=frozenset({3, 4}),
            i1_m0lin=frozenset({1, 2, 3, 4}),
            i1_lsharp=frozenset({1, 2}),
            dim_b=3,
            b_contains=frozenset({3, 4}),
            dim_v_sharp=2,
            dim_l_sharp=2,
            assumption_ok=True,
            cond_uncorr=True,
            cond_uncorr_witnesses=frozenset(),
            cond_het=False,
            cond_het_witnesses=frozenset({3, 4}),
            size_controllable=True,
            residual_dim=1,
            residual_span=(0.0, 0.0, 1.0, -1.0),
            c_star_hc0=2.0,
            c_star_achievers_hc0=frozenset({1, 2}),
        ),
    )


def fixtures() -> tuple[Fixture, ...]:
    """All eight fixture instances."""
    return (
        _a1(),
        _a2(0.0),
        _a2(1.0),
        _a3(),
        _a4(0.0),
        _a4(1.0),
        _remark_a1iv(),
        _two_group(),
    )


def fixture(name: str) -> Fixture:
    """Look up one instance by name (case-insensitive)."""
    wanted = name.strip().lower()
    for f in fixtures():
        if f.name.lower() == wanted:
            return f
    known = ", ".join(f.name for f in fixtures())
    raise InvalidInput(f"unknown fixture {name!r}; known instances: {known}")


def design_families() -> list[dict]:
    """The six design families, each with its instance names."""
    families: dict[str, list[str]] = {}
    order: list[str] = []
    for f in fixtures():
        if f.family not in families:
            families[f.family] = []
            order.append(f.family)
        families[f.family].append(f.name)
    return [{"family": fam, "instances": families[fam]} for fam in order]
