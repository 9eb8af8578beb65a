"""Dense real/complex linear algebra used throughout the package.

Matrices are plain numpy arrays: ``complex128`` for weight matrices,
channels and codewords, ``float64`` for equivalent channels and their
factorizations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_RANK_TOL",
    "QrFactorization",
    "RandomSource",
    "tilde_vec",
    "kron",
    "qr_decompose",
    "numerical_rank",
    "real_nullity",
    "sample_channel",
]

DEFAULT_RANK_TOL = 1e-9


def tilde_vec(a):
    """Stack the column-major real part of `a` on top of its imaginary part.

    >>> tilde_vec(np.array([[1 + 2j]]))
    array([1., 2.])
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a[:, None]
    col = a.reshape(-1, order="F")
    return np.concatenate([col.real, col.imag])


def kron(a, b):
    """Kronecker product of two (complex) matrices."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class QrFactorization:
    """``a[:, permutation] == q @ r``.

    `q` is square orthogonal (m x m) and `r` is m x n upper triangular with
    exact zeros below the diagonal.
    """

    q: np.ndarray
    r: np.ndarray
    permutation: np.ndarray

    @property
    def permutation_matrix(self):
        n = len(self.permutation)
        p = np.zeros((n, n))
        p[self.permutation, np.arange(n)] = 1.0
        return p


def qr_decompose(a, pivoting=False, null_tol=None):
    """Householder QR, optionally with greedy column pivoting.

    With ``pivoting=True`` the remaining column of largest norm is moved
    to the front at every step, so ``abs(diag(r))`` is non-increasing.

    `null_tol` handles columns that are numerically dependent on the ones
    before them.  When the residual norm of column k falls below
    ``null_tol * max column norm of a``, that column is treated as exactly
    dependent: its residual is zeroed and the reflector for step k is
    chosen to map a left-null direction of the remaining residual block
    onto ``e_k``, which leaves row k of `r` identically zero.  Without
    this, the reflector is built from rounding noise and row k fills with
    arbitrary O(1) entries.  The default (None) disables the treatment.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or min(a.shape) < 1:
        raise ValueError("qr_decompose needs a non-empty 2-D matrix")
    m, n = a.shape
    r = a.copy()
    q = np.eye(m)
    perm = np.arange(n)
    scale = np.linalg.norm(a, axis=0).max() if n else 0.0

    for k in range(min(m, n)):
        if pivoting:
            j = k + int(np.argmax(np.linalg.norm(r[k:, k:], axis=0)))
            if j != k:
                r[:, [k, j]] = r[:, [j, k]]
                perm[[k, j]] = perm[[j, k]]
        x = r[k:, k]
        normx = np.linalg.norm(x)

        if null_tol is not None and normx <= null_tol * scale:
            r[k:, k] = 0.0
            v = _null_reflector(r[k:, k + 1:], m - k)
        else:
            if normx == 0.0:
                continue
            v = x.copy()
            v[0] += np.copysign(normx, x[0])
            v /= np.linalg.norm(v)
        if v is None:
            continue
        r[k:, k:] -= 2.0 * np.outer(v, v @ r[k:, k:])
        q[:, k:] -= 2.0 * np.outer(q[:, k:] @ v, v)
        r[k + 1:, k] = 0.0

    return QrFactorization(q=q, r=np.triu(r), permutation=perm)


def _null_reflector(block, size):
    """Unit Householder vector v with (I - 2vv^T) u = e_1 for some u in the
    left null space of `block`, or None when the identity already works."""
    if block.shape[1] == 0:
        return None
    u_full, sv, _ = np.linalg.svd(block, full_matrices=True)
    rank = int(np.sum(sv > DEFAULT_RANK_TOL * max(sv.max(initial=0.0), 1e-300) * max(block.shape)))
    if rank >= size:
        # no left null direction: fall back to the identity reflector
        return None
    # pick the null direction closest to e_1 for a deterministic result
    null = u_full[:, rank:]
    u = null @ null[0]
    nu = np.linalg.norm(u)
    if nu < 1e-12:
        u = null[:, 0]
    else:
        u = u / nu
    e1 = np.zeros(size)
    e1[0] = 1.0
    v = u - e1
    nv = np.linalg.norm(v)
    if nv < 1e-14:
        return None
    return v / nv


def numerical_rank(a, rel_tol=DEFAULT_RANK_TOL):
    """Number of singular values above ``rel_tol * s_max * max(shape)``.

    Works for real and complex input; the zero matrix has rank 0.
    """
    a = np.asarray(a)
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0] * max(a.shape)))


def real_nullity(a, rel_tol=DEFAULT_RANK_TOL):
    a = np.asarray(a)
    return a.shape[1] - numerical_rank(a, rel_tol)


class RandomSource:
    """Seeded sample stream.

    Children are keyed by an integer index so that independent trials can
    be generated in any order (or in parallel) and still reproduce.
    """

    def __init__(self, seed, key=()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.key))
        )

    def child(self, index):
        return RandomSource(self.seed, self.key + (index,))

    def complex_normal(self, shape):
        """Circularly symmetric complex Gaussian, unit total variance."""
        g = self.generator.standard_normal(tuple(shape) + (2,))
        return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, key={self.key})"


def sample_channel(n, m, rng):
    """N x M Rayleigh channel matrix drawn from `rng`."""
    if n < 1 or m < 1:
        raise ValueError("channel dimensions must be positive")
    return rng.complex_normal((n, m))
