import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from stbclab.linalg import (
    RandomSource,
    kron,
    numerical_rank,
    qr_decompose,
    real_nullity,
    sample_channel,
    tilde_vec,
)


def test_tilde_vec_stacks_real_over_imag_column_major():
    a = np.array([[1 + 5j, 2 + 6j], [3 + 7j, 4 + 8j]])
    assert np.array_equal(tilde_vec(a), [1, 3, 2, 4, 5, 7, 6, 8])


def test_tilde_vec_is_real_linear():
    r = RandomSource(3)
    a, b = r.complex_normal((3, 2)), r.complex_normal((3, 2))
    assert np.allclose(tilde_vec(2.5 * a - b), 2.5 * tilde_vec(a) - tilde_vec(b))


def test_kron_matches_block_definition():
    a = np.array([[1, 2], [3, 4]])
    b = np.array([[0, 1j], [1, 0]])
    k = kron(a, b)
    assert k.shape == (4, 4)
    assert np.array_equal(k[2:, :2], 3 * b)


@pytest.mark.parametrize("shape", [(6, 4), (4, 4), (5, 7), (1, 3), (3, 1)])
@pytest.mark.parametrize("pivoting", [False, True])
def test_qr_reconstructs_and_is_orthogonal(shape, pivoting, np_rng):
    a = np_rng.standard_normal(shape)
    f = qr_decompose(a, pivoting=pivoting)
    assert np.allclose(f.q.T @ f.q, np.eye(shape[0]), atol=1e-12)
    assert np.allclose(np.tril(f.r, -1), 0.0)
    assert np.allclose(f.q @ f.r, a @ f.permutation_matrix, atol=1e-12)


def test_qr_agrees_with_scipy_up_to_signs(np_rng):
    a = np_rng.standard_normal((8, 5))
    ours = qr_decompose(a).r[:5]
    ref = scipy.linalg.qr(a, mode="economic")[1]
    assert np.allclose(np.abs(ours), np.abs(ref), atol=1e-12)


def test_pivoted_qr_orders_diagonal_like_scipy(np_rng):
    a = np_rng.standard_normal((9, 6)) @ np.diag([1, 1e-3, 10, 1, 1e2, 0.1])
    f = qr_decompose(a, pivoting=True)
    d = np.abs(np.diag(f.r))
    assert np.all(np.diff(d) <= 1e-12)
    _, ref_r, ref_p = scipy.linalg.qr(a, pivoting=True, mode="economic")
    assert np.array_equal(f.permutation, ref_p)
    assert np.allclose(d, np.abs(np.diag(ref_r)))


def test_pivoted_qr_reveals_rank(np_rng):
    a = np_rng.standard_normal((10, 4)) @ np_rng.standard_normal((4, 7))
    f = qr_decompose(a, pivoting=True)
    d = np.abs(np.diag(f.r))
    assert np.all(d[:4] > 1e-8) and np.all(d[4:] < 1e-10)


def test_null_tol_zeroes_rows_of_dependent_columns(np_rng):
    base = np_rng.standard_normal((8, 3))
    a = np.column_stack([base, base @ [1.0, -2.0, 0.5], np_rng.standard_normal(8)])
    plain = qr_decompose(a)
    treated = qr_decompose(a, null_tol=1e-9)
    assert np.allclose(treated.q @ treated.r, a, atol=1e-12)
    assert np.allclose(treated.q.T @ treated.q, np.eye(8), atol=1e-12)
    assert np.max(np.abs(treated.r[3])) < 1e-12
    # without the treatment the noise-driven reflector fills row 3
    assert np.max(np.abs(plain.r[3])) > 1e-6


def test_qr_rejects_empty():
    with pytest.raises(ValueError):
        qr_decompose(np.zeros((0, 3)))


def test_numerical_rank_basic():
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.eye(4)) == 4
    assert numerical_rank(np.ones((5, 5))) == 1
    assert numerical_rank(np.array([[1, 1j], [1j, -1]])) == 1
    assert real_nullity(np.ones((2, 4))) == 3


def test_random_source_children_reproduce_in_any_order():
    a = RandomSource(5)
    first = [a.child(i).generator.standard_normal() for i in range(4)]
    again = [RandomSource(5).child(i).generator.standard_normal() for i in reversed(range(4))]
    assert first == list(reversed(again))
    assert len(set(first)) == 4


def test_complex_normal_unit_variance():
    z = RandomSource(0).complex_normal((200000,))
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.02
    assert abs(np.var(z.real) - 0.5) < 0.01


def test_sample_channel_shape_and_errors():
    assert sample_channel(4, 2, RandomSource(1)).shape == (4, 2)
    with pytest.raises(ValueError):
        sample_channel(0, 2, RandomSource(1))


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 9), n=st.integers(1, 9), r=st.integers(0, 9), seed=st.integers(0, 2**31))
def test_qr_rank_deficient_property(m, n, r, seed):
    g = np.random.default_rng(seed)
    r = min(r, m, n)
    a = g.standard_normal((m, r)) @ g.standard_normal((r, n)) if r else np.zeros((m, n))
    assert numerical_rank(a) == r
    f = qr_decompose(a, pivoting=True, null_tol=1e-9)
    assert np.allclose(f.q @ f.r, a @ f.permutation_matrix, atol=1e-10)
    assert np.allclose(f.q.T @ f.q, np.eye(m), atol=1e-10)
