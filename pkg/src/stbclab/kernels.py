"""Kernel-dimension checks behind the Hermitian-basis rank law.

For a channel H (N x M, M < N) three facts hold with probability one:

* no standard basis vector e_i lies in the column space of H,
* the real solution space of z^H H = 0 has dimension 2(N - M), and
  fixing Im(z_i) = 0 cuts it to 2(N - M) - 1,
* the real map A -> AH on N x N Hermitian matrices has a kernel of
  dimension (N - M)^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import standard_hermitian_basis
from .linalg import DEFAULT_RANK_TOL, numerical_rank, real_nullity, sample_channel, tilde_vec

__all__ = [
    "left_null_system",
    "left_null_dimension",
    "real_component_kernel_dimension",
    "augmented_ranks",
    "hermitian_kernel_map",
    "hermitian_kernel_nullity",
    "KernelTrial",
    "kernel_trial",
    "run_kernel_checks",
]


def left_null_system(h):
    """Real 2M x 2N matrix L with L @ [Re z; Im z] = 0 iff z^H H = 0.

    With z = u + iv, z^H H = (u - iv)^T (Hr + iHi) splits into
    u^T Hr + v^T Hi = 0 and u^T Hi - v^T Hr = 0.
    """
    h = np.asarray(h, dtype=complex)
    hr, hi = h.real, h.imag
    top = np.hstack([hr.T, hi.T])
    bottom = np.hstack([hi.T, -hr.T])
    return np.vstack([top, bottom])


def left_null_dimension(h, rel_tol=DEFAULT_RANK_TOL):
    return real_nullity(left_null_system(h), rel_tol)


def real_component_kernel_dimension(h, i, rel_tol=DEFAULT_RANK_TOL):
    """Real dimension of {z : z^H H = 0, Im(z_i) = 0}."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    extra = np.zeros((1, 2 * n))
    extra[0, n + i] = 1.0
    return real_nullity(np.vstack([left_null_system(h), extra]), rel_tol)


def augmented_ranks(h, rel_tol=DEFAULT_RANK_TOL):
    """Complex rank of [H e_i] for every i."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    eye = np.eye(n, dtype=complex)
    return [numerical_rank(np.hstack([h, eye[:, [i]]]), rel_tol) for i in range(n)]


def hermitian_kernel_map(h):
    """2NM x N^2 real matrix of A -> AH over the standard Hermitian basis."""
    h = np.asarray(h, dtype=complex)
    basis = standard_hermitian_basis(h.shape[0])
    return np.column_stack([tilde_vec(b @ h) for b in basis])


def hermitian_kernel_nullity(h, rel_tol=DEFAULT_RANK_TOL):
    return real_nullity(hermitian_kernel_map(h), rel_tol)


@dataclass
class KernelTrial:
    index: int
    augmented_ranks: list
    left_null_dim: int
    component_kernel_dims: list
    hermitian_nullity: int
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def kernel_trial(h, index=0, rel_tol=DEFAULT_RANK_TOL):
    h = np.asarray(h, dtype=complex)
    n, m = h.shape
    d = max(n - m, 0)
    aug = augmented_ranks(h, rel_tol)
    left = left_null_dimension(h, rel_tol)
    comp = [real_component_kernel_dimension(h, i, rel_tol) for i in range(n)]
    herm = hermitian_kernel_nullity(h, rel_tol)

    failures = []
    want_aug = min(m + 1, n)
    if any(r != want_aug for r in aug):
        failures.append(f"rank([H e_i]) = {aug}, expected {want_aug}")
    if left != 2 * d:
        failures.append(f"left null space dimension {left}, expected {2 * d}")
    want_comp = max(2 * d - 1, 0)
    if any(c != want_comp for c in comp):
        failures.append(f"dim ker(phi_i) = {comp}, expected {want_comp}")
    if herm != d * d:
        failures.append(f"Hermitian kernel nullity {herm}, expected {d * d}")
    return KernelTrial(index, aug, left, comp, herm, failures)


def run_kernel_checks(n, m, trials, rng, rel_tol=DEFAULT_RANK_TOL):
    """One :class:`KernelTrial` per random channel; trial i uses ``rng.child(i)``."""
    return [kernel_trial(sample_channel(n, m, rng.child(i)), i, rel_tol) for i in range(trials)]
