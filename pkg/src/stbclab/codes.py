"""Weight-matrix sets of the code families studied here.

Every constructor returns an immutable :class:`WeightSet`.  Groups are
stored as tuples of 0-based symbol indices; the JSON form uses 1-based
indices.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import kron, numerical_rank, tilde_vec

__all__ = [
    "PAULI_I",
    "PAULI_X",
    "PAULI_Z",
    "WeightSet",
    "FamilyParams",
    "ValidationReport",
    "pauli_hermitian_basis",
    "herm3_basis",
    "standard_hermitian_basis",
    "herm_basis_code",
    "fgd_ren_code",
    "natarajan_g2_code",
    "ryggz_basis_set",
    "validate_weight_set",
    "realify",
    "build_family",
    "FAMILIES",
]

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class WeightSet:
    t: int
    n: int
    matrices: tuple
    groups: tuple
    name: str = ""

    def __post_init__(self):
        mats = tuple(np.array(a, dtype=complex) for a in self.matrices)
        for a in mats:
            if a.shape != (self.t, self.n):
                raise ValueError(f"weight matrix of shape {a.shape}, expected {(self.t, self.n)}")
            a.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        groups = tuple(tuple(int(i) for i in grp) for grp in self.groups)
        flat = sorted(itertools.chain.from_iterable(groups))
        if any(len(grp) == 0 for grp in groups) or flat != list(range(len(mats))):
            raise ValueError("groups must partition the symbol indices")
        object.__setattr__(self, "groups", groups)

    @property
    def k(self):
        return len(self.matrices)

    @property
    def g(self):
        return len(self.groups)

    @property
    def rate(self):
        """Complex symbols per channel use, K / (2T)."""
        return self.k / (2 * self.t)

    def to_json(self):
        doc = {
            "name": self.name,
            "T": self.t,
            "N": self.n,
            "K": self.k,
            "groups": [[i + 1 for i in grp] for grp in self.groups],
            "matrices": [
                [[float(z.real), float(z.imag)] for z in a.reshape(-1)]
                for a in self.matrices
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        t, n = int(doc["T"]), int(doc["N"])
        mats = []
        for flat in doc["matrices"]:
            arr = np.array([complex(re, im) for re, im in flat])
            mats.append(arr.reshape(t, n))
        if len(mats) != int(doc["K"]):
            raise ValueError("K does not match the number of matrices")
        groups = [[i - 1 for i in grp] for grp in doc["groups"]]
        return cls(t=t, n=n, matrices=tuple(mats), groups=tuple(groups), name=doc.get("name", ""))


@dataclass(frozen=True)
class FamilyParams:
    """Family tag plus its size parameters.

    Tags: ``herm`` (optionally ``standard=True``), ``fgd-ren``,
    ``natarajan-g2``, ``ryggz-basis``.
    """

    family: str
    n: int | None = None
    t: int | None = None
    standard: bool = False
    extra: dict = field(default_factory=dict, compare=False)


def pauli_hermitian_basis(m):
    """All m-fold Kronecker products of I, X, Z and iXZ (2^m x 2^m each).

    Every matrix is unitary and Hermitian; together they form a real basis
    of the 4^m-dimensional space of Hermitian matrices.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    single = [PAULI_I, PAULI_X, PAULI_Z, 1j * PAULI_X @ PAULI_Z]
    out = []
    for combo in itertools.product(single, repeat=m):
        a = np.eye(1, dtype=complex)
        for factor in combo:
            a = kron(a, factor)
        out.append(a)
    return out


def herm3_basis():
    """The nine 3 x 3 unitary Hermitian matrices of the N=3 example, in order."""
    i = 1j
    rows = [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 1]],
        [[1, 0, 0], [0, 1, 0], [0, 0, -1]],
        [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
        [[0, i, 0], [-i, 0, 0], [0, 0, 1]],
        [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
        [[0, 0, i], [0, 1, 0], [-i, 0, 0]],
        [[1, 0, 0], [0, 0, 1], [0, 1, 0]],
        [[1, 0, 0], [0, 0, i], [0, -i, 0]],
    ]
    return [np.array(r, dtype=complex) for r in rows]


def standard_hermitian_basis(n):
    """E_jj, then E_jk + E_kj and i(E_jk - E_kj) for j < k."""
    if n < 1:
        raise ValueError("n must be at least 1")
    out = []
    for j in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[j, j] = 1
        out.append(e)
    for j, k in itertools.combinations(range(n), 2):
        s = np.zeros((n, n), dtype=complex)
        s[j, k] = s[k, j] = 1
        out.append(s)
    for j, k in itertools.combinations(range(n), 2):
        a = np.zeros((n, n), dtype=complex)
        a[j, k] = 1j
        a[k, j] = -1j
        out.append(a)
    return out


def _unitary_hermitian_basis(n):
    if n == 3:
        return herm3_basis()
    if n >= 2 and n & (n - 1) == 0:
        return pauli_hermitian_basis(n.bit_length() - 1)
    raise ValueError(f"no unitary Hermitian basis available for n={n}; use n=3 or a power of 2")


def herm_basis_code(n, standard=False):
    """Single-group code whose N^2 weight matrices span the Hermitian matrices.

    With ``standard=True`` the canonical (non-unitary) Hermitian basis is used,
    which is available for every n and spans the same space.
    """
    mats = standard_hermitian_basis(n) if standard else _unitary_hermitian_basis(n)
    label = f"herm-std-{n}" if standard else f"herm-{n}"
    return WeightSet(t=n, n=n, matrices=tuple(mats), groups=(tuple(range(n * n)),), name=label)


def fgd_ren_code():
    """Rate-17/8 two-group fast-group-decodable code for four antennas.

    Group 1 is the identity; group 2 holds sixteen skew-Hermitian
    Pauli products.  The eleventh matrix is ZX (x) Z; putting ZX (x) X
    there as well would repeat the ninth and make the set dependent.
    """
    X, Z, I2 = PAULI_X, PAULI_Z, PAULI_I
    ZX = Z @ X
    i = 1j
    mats = [
        kron(I2, I2),
        i * kron(Z, I2),
        kron(ZX, I2),
        i * kron(X, Z),
        kron(X, ZX),
        i * kron(X, X),
        kron(I2, ZX),
        i * kron(Z, X),
        kron(ZX, X),
        i * kron(ZX, ZX),
        kron(ZX, Z),
        i * kron(X, I2),
        kron(Z, ZX),
        i * kron(I2, X),
        i * kron(Z, Z),
        i * kron(I2, I2),
        i * kron(I2, Z),
    ]
    return WeightSet(t=4, n=4, matrices=tuple(mats), groups=((0,), tuple(range(1, 17))), name="fgd-ren")


def _block_diag(a, b):
    n1, n2 = a.shape[0], b.shape[0]
    out = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    out[:n1, :n1] = a
    out[n1:, n1:] = b
    return out


def natarajan_g2_code(n):
    """Delay-optimal two-group code on 2n antennas built from an n x n
    unitary Hermitian basis B_1..B_{n^2}.

    Group 1: diag(iB_l, I_n) for every l, then diag(iB_1, -I_n).
    Group 2 mirrors the blocks.  K = 2(n^2 + 1).
    """
    basis = _unitary_hermitian_basis(n)
    eye = np.eye(n, dtype=complex)
    first = [_block_diag(1j * b, eye) for b in basis] + [_block_diag(1j * basis[0], -eye)]
    second = [_block_diag(eye, 1j * b) for b in basis] + [_block_diag(-eye, 1j * basis[0])]
    half = n * n + 1
    return WeightSet(
        t=2 * n,
        n=2 * n,
        matrices=tuple(first + second),
        groups=(tuple(range(half)), tuple(range(half, 2 * half))),
        name=f"natarajan-g2-{n}",
    )


def ryggz_basis_set(n, t):
    """Span basis of one decoding group of the unbalanced two-group codes.

    The T x N matrices are [F;0;0] with F = [I_N; 0] of height T/2, then
    [0;B_l;0] for the N^2 standard Hermitian matrices, then [0;0;E_l] for
    the real and imaginary unit matrices of size (T/2 - N) x N.
    """
    if t % 2 or t < 2 * n or n < 1:
        raise ValueError("need even t with t >= 2n")
    half = t // 2
    mats = []
    top = np.zeros((t, n), dtype=complex)
    top[:n, :n] = np.eye(n)
    mats.append(top)
    for b in standard_hermitian_basis(n):
        a = np.zeros((t, n), dtype=complex)
        a[half:half + n, :] = b
        mats.append(a)
    rows = half - n
    for unit in (1.0, 1j):
        for r in range(rows):
            for c in range(n):
                a = np.zeros((t, n), dtype=complex)
                a[half + n + r, c] = unit
                mats.append(a)
    return WeightSet(t=t, n=n, matrices=tuple(mats), groups=(tuple(range(len(mats))),),
                     name=f"ryggz-basis-{n}-{t}")


FAMILIES = ("herm", "fgd-ren", "natarajan-g2", "ryggz-basis")


def build_family(params):
    fam = params.family
    if fam == "herm":
        return herm_basis_code(params.n, standard=params.standard)
    if fam == "fgd-ren":
        return fgd_ren_code()
    if fam == "natarajan-g2":
        return natarajan_g2_code(params.n)
    if fam == "ryggz-basis":
        return ryggz_basis_set(params.n, params.t)
    raise ValueError(f"unknown family {fam!r}")


def realify(matrices):
    """K x 2TN real matrix whose rows are the tilde-vecs of the inputs."""
    return np.array([tilde_vec(a) for a in matrices])


@dataclass
class ValidationReport:
    independent: bool
    real_rank: int
    k: int
    hr_residual: float
    passed: bool
    failures: list

    def __bool__(self):
        return self.passed


HR_TOL = 1e-12


def validate_weight_set(w):
    """Check real linear independence and cross-group Hurwitz-Radon
    orthogonality (max Frobenius norm of A_i^H A_j + A_j^H A_i)."""
    rank = numerical_rank(realify(w.matrices))
    failures = []
    independent = rank == w.k
    if not independent:
        failures.append(f"weight matrices span only {rank} of {w.k} real dimensions")
    worst = 0.0
    for ga, gb in itertools.combinations(w.groups, 2):
        for i in ga:
            ai = w.matrices[i]
            for j in gb:
                aj = w.matrices[j]
                res = np.linalg.norm(ai.conj().T @ aj + aj.conj().T @ ai)
                worst = max(worst, float(res))
    if w.g > 1 and worst >= HR_TOL:
        failures.append(f"cross-group Hurwitz-Radon residual {worst:.3e}")
    return ValidationReport(independent=independent, real_rank=rank, k=w.k, hr_residual=worst,
                            passed=not failures, failures=failures)
