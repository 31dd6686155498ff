import numpy as np
import pytest

from hetsize import fixture


@pytest.fixture
def a1():
    return fixture("A1")


@pytest.fixture
def a1_problem(a1):
    return a1.problem


def basis_vector(n: int, i: int) -> np.ndarray:
    """1-based standard basis vector."""
    e = np.zeros(n)
    e[i - 1] = 1.0
    return e


def random_nonsingular(rng: np.random.Generator, k: int) -> np.ndarray:
    while True:
        a = rng.standard_normal((k, k))
        if abs(np.linalg.det(a)) > 1e-3:
            return a
