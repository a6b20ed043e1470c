"""
Shared fixtures: the simulated reference dataset and small canonical designs
"""
import numpy as np
import pytest

from orthant_mc.core.design import build_signed_design
from orthant_mc.core.propriety import check_propriety
from orthant_mc.data.data_loader import simulate
from orthant_mc.models.dataset import Dataset

# Monte Carlo comparisons pass within this many standard errors
Z_TOL = 3.0

REFERENCE_BETA = [0.3, -0.5]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: large Monte Carlo or quadrature runs")


def reference_dataset() -> tuple[Dataset, int]:
    """n=10, p=2 simulated dataset; the seed starts at 42 and moves on until the data are proper"""
    seed = 42
    while True:
        d = simulate(10, 2, REFERENCE_BETA, seed)
        if check_propriety(build_signed_design(d)).is_proper:
            return d, seed
        seed += 1


@pytest.fixture(scope="session")
def d1() -> Dataset:
    return reference_dataset()[0]


@pytest.fixture
def symmetric_pair() -> Dataset:
    """X = (1, 1)', y = (1, 0): proper, posterior symmetric about 0"""
    return Dataset.from_arrays([1, 0], [[1.0], [1.0]])


@pytest.fixture
def separated_pair() -> Dataset:
    """X = (1, 1)', y = (1, 1): completely separated"""
    return Dataset.from_arrays([1, 1], [[1.0], [1.0]])


@pytest.fixture
def quasi_separated() -> Dataset:
    """X_y rows (1, 0), (-1, 0), (0, 1)"""
    return Dataset.from_arrays([1, 1, 1], [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def random_dataset(rng: np.random.Generator, n: int, p: int) -> Dataset:
    X = rng.standard_normal((n, p))
    y = rng.integers(0, 2, size=n)
    return Dataset.from_arrays(y, X)
