"""Equivalent channel matrices, their ranks and the closed-form rank laws."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_RANK_TOL, numerical_rank, sample_channel, tilde_vec

__all__ = [
    "EquivChannel",
    "RankPrediction",
    "RankStats",
    "build_equiv_channel",
    "f_rank",
    "predict_rank",
    "rank_monte_carlo",
    "group_orthogonality",
    "rank_additivity_check",
    "rank_stats_csv",
    "table_exponent",
    "ORTHOGONALITY_TOL",
]

ORTHOGONALITY_TOL = 1e-9


@dataclass(frozen=True)
class EquivChannel:
    """Real 2MT x K matrix G with one column per weight matrix, A_j H."""

    g: np.ndarray
    groups: tuple
    m: int

    @property
    def group_blocks(self):
        return [self.g[:, list(grp)] for grp in self.groups]

    @property
    def k(self):
        return self.g.shape[1]


def build_equiv_channel(w, h):
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != w.n:
        raise ValueError(f"channel must have {w.n} rows, got shape {h.shape}")
    g = np.column_stack([tilde_vec(a @ h) for a in w.matrices])
    return EquivChannel(g=g, groups=w.groups, m=h.shape[1])


def f_rank(n, m):
    """n^2 - ((n - m)^+)^2, the generic rank of the Hermitian-basis code."""
    if n < 0 or m < 0:
        raise ValueError("f_rank needs non-negative arguments")
    return n * n - max(n - m, 0) ** 2


@dataclass(frozen=True)
class RankPrediction:
    family: str
    group_ranks: tuple
    group_sizes: tuple
    note: str = ""

    @property
    def total(self):
        return sum(self.group_ranks)

    @property
    def k(self):
        return sum(self.group_sizes)

    @property
    def singular(self):
        return self.total < self.k

    @property
    def group_exponents(self):
        return tuple(s - r for s, r in zip(self.group_sizes, self.group_ranks))


def predict_rank(family, m):
    """Generic (probability-one) rank of G for a family and M receive antennas.

    The NatarajanG2 prediction doubles as the one for the g=2 Srinath
    structure, whose per-group rank formula is identical.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    fam = family.family
    if fam == "herm":
        n = family.n
        return RankPrediction(fam, (f_rank(n, m),), (n * n,))
    if fam == "fgd-ren":
        return RankPrediction(fam, (1, f_rank(4, m)), (1, 16))
    if fam == "natarajan-g2":
        n = family.n
        per = f_rank(n, m) + 1
        return RankPrediction(fam, (per, per), (n * n + 1, n * n + 1),
                              note="also covers the g=2 Srinath structure")
    if fam == "ryggz-basis":
        n, t = family.n, family.t
        per = (t - 2 * n) * min(n, m) + f_rank(n, m) + 1
        return RankPrediction(fam, (per,), (t * n - n * n + 1,))
    raise ValueError(f"no rank law for family {fam!r}")


@dataclass
class RankStats:
    trials: int
    histogram: dict
    predicted: int | None
    family: str = ""
    n: int = 0
    t: int = 0
    k: int = 0
    m: int = 0

    @property
    def match_fraction(self):
        if self.predicted is None:
            return float("nan")
        return self.histogram.get(self.predicted, 0) / self.trials

    @property
    def min_rank(self):
        return min(self.histogram)

    @property
    def max_rank(self):
        return max(self.histogram)

    def csv_row(self):
        return [self.family, self.n, self.t, self.k, self.m, self.trials,
                "" if self.predicted is None else self.predicted,
                self.min_rank, self.max_rank, f"{self.match_fraction:.6f}"]


RANK_CSV_HEADER = ["family", "N", "T", "K", "M", "trials", "predicted_rank",
                   "min_rank", "max_rank", "match_fraction"]


def rank_stats_csv(stats):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RANK_CSV_HEADER)
    for s in stats:
        writer.writerow(s.csv_row())
    return buf.getvalue()


def rank_monte_carlo(w, m, trials, rng, family=None, rel_tol=DEFAULT_RANK_TOL):
    """Rank of G over `trials` independent Rayleigh channels.

    Trial i draws its channel from ``rng.child(i)``.  When `family` is given
    the stats carry its predicted total rank.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    counts = Counter()
    for i in range(trials):
        h = sample_channel(w.n, m, rng.child(i))
        counts[numerical_rank(build_equiv_channel(w, h).g, rel_tol)] += 1
    predicted = predict_rank(family, m).total if family is not None else None
    return RankStats(trials=trials, histogram=dict(sorted(counts.items())), predicted=predicted,
                     family=family.family if family is not None else w.name,
                     n=w.n, t=w.t, k=w.k, m=m)


def group_orthogonality(ec):
    """Largest |cosine| between columns of different group blocks."""
    if len(ec.groups) < 2:
        raise ValueError("group orthogonality needs at least two groups")
    norms = np.linalg.norm(ec.g, axis=0)
    norms[norms == 0] = 1.0
    unit = ec.g / norms
    worst = 0.0
    for a in range(len(ec.groups)):
        for b in range(a + 1, len(ec.groups)):
            cross = unit[:, list(ec.groups[a])].T @ unit[:, list(ec.groups[b])]
            worst = max(worst, float(np.abs(cross).max()))
    return worst


def rank_additivity_check(ec, rel_tol=DEFAULT_RANK_TOL):
    total = numerical_rank(ec.g, rel_tol)
    parts = [numerical_rank(b, rel_tol) for b in ec.group_blocks]
    return total == sum(parts)



def table_exponent(family, m):
    """Closed-form exponent of q in the decoding complexity (per decoding
    group for the multigroup families), written independently of
    :func:`predict_rank`."""
    fam = family.family
    if fam == "herm":
        return max(family.n - m, 0) ** 2
    if fam == "fgd-ren":
        return max(4 - m, 0) ** 2
    if fam == "natarajan-g2":
        # g = 2: multiplier 2^floor((g-1)/2) = 1
        return max(family.n - m, 0) ** 2
    if fam == "ryggz-basis":
        return max(family.n - m, 0) * (family.t - family.n - m)
    raise ValueError(f"no complexity law for family {fam!r}")
