import numpy as np
import pytest

from covsep import DensityMatrix, pure_state


@pytest.fixture
def bell():
    v = np.zeros(4)
    v[0] = v[3] = 1 / np.sqrt(2)
    return pure_state(v, 2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def random_pure(rng, dim_a, dim_b):
    v = rng.standard_normal(dim_a * dim_b) + 1j * rng.standard_normal(dim_a * dim_b)
    return pure_state(v, dim_a, dim_b)


def max_mixed(dim_a, dim_b):
    n = dim_a * dim_b
    return DensityMatrix(dim_a, dim_b, np.eye(n) / n)
