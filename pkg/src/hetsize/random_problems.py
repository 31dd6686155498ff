"""Random testing-problem generator for audits and property suites.

Produces small designs mixing continuous and dummy regressors, optionally
injecting leverage-one observations (a zero row paired with an indicator
column, so one standard basis vector lands in span(X)) and sparse restriction
rows, which together exercise every regime of the size-control conditions.
"""

from __future__ import annotations

import numpy as np

from .conditions import HetModel, check_assumption
from .errors import RankDeficient
from .model import TestProblem, validate_problem


def random_problem(
    rng: np.random.Generator,
    n_max: int = 25,
    ensure_assumption: bool = False,
    leverage_prob: float = 0.35,
) -> TestProblem:
    """Draw a valid random problem (full-rank design, nonzero restriction)."""
    while True:
        n = int(rng.integers(4, n_max + 1))
        k = int(rng.integers(1, min(n - 1, 6) + 1))
        cols = []
        for j in range(k):
            if j == 0 and rng.random() < 0.5:
                cols.append(np.ones(n))
            elif rng.random() < 0.35:
                cols.append((rng.random(n) < rng.uniform(0.2, 0.8)).astype(float))
            else:
                cols.append(rng.standard_normal(n))
        X = np.column_stack(cols)
        # leverage-one injection: a fresh observation whose basis vector lies
        # in span(X), via a zero row plus an indicator column
        while rng.random() < leverage_prob and X.shape[1] + 1 < X.shape[0] + 1 and n <= n_max:
            n_cur, k_cur = X.shape
            X = np.vstack([X, np.zeros(k_cur)])
            e_new = np.zeros(n_cur + 1)
            e_new[-1] = float(rng.uniform(0.5, 3.0))
            X = np.column_stack([X, e_new])
            leverage_prob *= 0.5
        R = rng.standard_normal(X.shape[1])
        R[rng.random(X.shape[1]) < 0.25] = 0.0
        if not np.any(R):
            R[int(rng.integers(0, X.shape[1]))] = 1.0
        r = 0.0 if rng.random() < 0.5 else float(rng.standard_normal())
        try:
            problem = validate_problem(X, R, r)
        except RankDeficient:
            continue
        if ensure_assumption and not check_assumption(problem):
            continue
        return problem


def random_partition(rng: np.random.Generator, n: int) -> HetModel:
    """Draw a random composition of n into consecutive blocks."""
    m = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), size=m - 1, replace=False)) if m > 1 else []
    bounds = [0, *[int(c) for c in cuts], n]
    return HetModel(tuple(b - a for a, b in zip(bounds[:-1], bounds[1:])))
