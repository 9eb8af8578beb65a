import numpy as np
import pytest

from stbclab.linalg import RandomSource


@pytest.fixture
def rng():
    return RandomSource(1234)


def random_real(rng, m, n):
    return rng.generator.standard_normal((m, n))


@pytest.fixture
def np_rng():
    return np.random.default_rng(7)
