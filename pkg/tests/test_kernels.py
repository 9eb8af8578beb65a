import numpy as np
import pytest

from stbclab.kernels import (
    augmented_ranks,
    hermitian_kernel_nullity,
    kernel_trial,
    left_null_dimension,
    left_null_system,
    real_component_kernel_dimension,
    run_kernel_checks,
)
from stbclab.linalg import RandomSource, sample_channel


def test_left_null_system_encodes_complex_equation():
    rs = RandomSource(0)
    h = sample_channel(4, 2, rs)
    # a genuine left null vector from the complement of the column space
    q, _ = np.linalg.qr(h, mode="complete")
    z = q[:, 3]
    assert np.allclose(z.conj() @ h, 0)
    assert np.allclose(left_null_system(h) @ np.concatenate([z.real, z.imag]), 0)


@pytest.mark.parametrize("n,m", [(3, 2), (4, 1), (5, 3)])
def test_dimensions(n, m):
    h = sample_channel(n, m, RandomSource(n * 10 + m))
    d = n - m
    assert left_null_dimension(h) == 2 * d
    assert all(real_component_kernel_dimension(h, i) == 2 * d - 1 for i in range(n))
    assert augmented_ranks(h) == [m + 1] * n
    assert hermitian_kernel_nullity(h) == d * d


def test_square_channel_has_trivial_kernels():
    t = kernel_trial(sample_channel(3, 3, RandomSource(1)))
    assert t.passed
    assert t.hermitian_nullity == 0 and t.left_null_dim == 0


def test_structured_channel_is_flagged():
    # e_1 lies in the column space, so rank([H e_1]) drops
    h = np.zeros((3, 1), dtype=complex)
    h[0, 0] = 1.0
    t = kernel_trial(h)
    assert not t.passed
    assert t.augmented_ranks[0] == 1


def test_run_kernel_checks_indices():
    trials = run_kernel_checks(4, 2, 3, RandomSource(0))
    assert [t.index for t in trials] == [0, 1, 2]
    assert all(t.passed for t in trials)
