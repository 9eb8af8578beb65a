"""Experiment drivers behind the command-line interface.

Each ``run_*`` function returns a plain report object; the CLI only
parses arguments, formats reports and maps ``report.ok`` to an exit code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import (
    build_equiv_channel,
    predict_rank,
    rank_additivity_check,
    rank_monte_carlo,
    table_exponent,
)
from .codes import build_family
from .decoder import (
    COST_RTOL,
    SignalSet,
    brute_force_ml,
    complexity_scan,
    multigroup_decode,
    rank_deficient_decode,
    simulate_transmission,
)
from .kernels import run_kernel_checks
from .linalg import DEFAULT_RANK_TOL, RandomSource, numerical_rank, qr_decompose, sample_channel

BUILTIN_FIXTURES = {
    "fgd-example": "fgd_example_h.json",
    "herm3-example": "herm3_example_h.json",
    "natarajan-example": "natarajan_example_h.json",
}

PATTERN_REL_TOL = 1e-9


def load_h_fixture(source):
    """Channel matrix from a JSON document ``{rows, cols, entries}`` with
    entries as ``[re, im]`` pairs in column-major order.  `source` is a
    path or one of the names in :data:`BUILTIN_FIXTURES`."""
    if source in BUILTIN_FIXTURES:
        text = resources.files("stbclab.fixtures").joinpath(BUILTIN_FIXTURES[source]).read_text()
    else:
        text = Path(source).read_text()
    doc = json.loads(text)
    rows, cols = int(doc["rows"]), int(doc["cols"])
    flat = np.array([complex(re, im) for re, im in doc["entries"]])
    if flat.size != rows * cols:
        raise ValueError("fixture entry count does not match rows * cols")
    return flat.reshape(cols, rows).T


def dump_h_fixture(h):
    h = np.asarray(h, dtype=complex)
    col = h.reshape(-1, order="F")
    return json.dumps({"rows": h.shape[0], "cols": h.shape[1],
                       "entries": [[float(z.real), float(z.imag)] for z in col]}, indent=1)


@dataclass
class RPattern:
    """Boolean mask of entries above ``PATTERN_REL_TOL * max |r|``."""

    mask: np.ndarray

    @classmethod
    def from_matrix(cls, r, rel_tol=PATTERN_REL_TOL):
        r = np.asarray(r)
        top = np.abs(r).max() if r.size else 0.0
        return cls(mask=np.abs(r) > rel_tol * top)

    @property
    def rows(self):
        return self.mask.shape[0]

    @property
    def cols(self):
        return self.mask.shape[1]

    @property
    def zero_trailing_rows(self):
        count = 0
        for row in self.mask[::-1]:
            if row.any():
                break
            count += 1
        return count

    def render(self):
        return "\n".join(" ".join("a" if v else "0" for v in row) for row in self.mask)


@dataclass
class RankReport:
    stats: list
    ok: bool


def run_rank(family, ms, trials, seed, code=None, rel_tol=DEFAULT_RANK_TOL):
    """Rank Monte Carlo for each M in `ms`; ``ok`` iff every trial matched."""
    w = code if code is not None else build_family(family)
    stats = []
    for m in ms:
        fam = family if code is None else None
        # same channel seed stream for every M keeps runs comparable
        stats.append(rank_monte_carlo(w, m, trials, RandomSource(seed).child(m), family=fam,
                                      rel_tol=rel_tol))
    ok = all(s.predicted is None or s.match_fraction == 1.0 for s in stats)
    return RankReport(stats=stats, ok=ok)


@dataclass
class PatternReport:
    name: str
    pattern: RPattern
    rank: int
    group_ranks: list
    additive: bool | None
    ok: bool = True


def run_rpattern(w, h):
    """Pattern of R from unpivoted QR of G (identity generator).

    Numerically dependent columns get an all-zero row in R (see
    :func:`qr_decompose`) so the zero structure is exact.
    """
    ec = build_equiv_channel(w, h)
    f = qr_decompose(ec.g, pivoting=False, null_tol=DEFAULT_RANK_TOL)
    group_ranks = [numerical_rank(b) for b in ec.group_blocks]
    additive = rank_additivity_check(ec) if len(ec.groups) > 1 else None
    return PatternReport(name=w.name, pattern=RPattern.from_matrix(f.r), rank=numerical_rank(ec.g),
                         group_ranks=group_ranks, additive=additive,
                         ok=additive is not False)


@dataclass
class AppendixReport:
    n: int
    m: int
    trials: list
    ok: bool

    @property
    def failures(self):
        return sum(not t.passed for t in self.trials)


def run_appendix(n, m, trials, seed, allow_full=False):
    if m >= n and not allow_full:
        raise ValueError("appendix checks need M < N (pass allow_full to check anyway)")
    if n < 1 or m < 1 or trials < 1:
        raise ValueError("n, m and trials must be positive")
    results = run_kernel_checks(n, m, trials, RandomSource(seed))
    return AppendixReport(n=n, m=m, trials=results, ok=all(t.passed for t in results))


@dataclass
class DecodeReport:
    code: str
    m: int
    q: int
    instances: int
    mismatches: int
    outer_candidates: set = field(default_factory=set)
    group_outer_candidates: set = field(default_factory=set)
    avg_nodes_joint: float = 0.0
    avg_nodes_multigroup: float | None = None
    errors_vs_truth: int = 0

    @property
    def ok(self):
        return self.mismatches == 0


def _agrees(res, ref):
    same_s = np.array_equal(res.s_hat, ref.s_hat)
    scale = max(abs(ref.cost), abs(res.cost))
    return same_s and abs(res.cost - ref.cost) <= COST_RTOL * scale


def run_decode(w, m, q, instances, seed, snr_db=10.0, multigroup=None):
    """Compare the rank-deficient (and multigroup) decoders with brute force."""
    if multigroup is None:
        multigroup = w.g > 1
    sig = SignalSet(q)
    rng = RandomSource(seed)
    report = DecodeReport(code=w.name, m=m, q=q, instances=instances, mismatches=0)
    joint_nodes = []
    group_nodes = []
    for i in range(instances):
        child = rng.child(i)
        inst = simulate_transmission(w, sig, sample_channel(w.n, m, child), snr_db, child)
        ref = brute_force_ml(inst.channel, sig, inst.y)
        joint = rank_deficient_decode(inst.channel, sig, inst.y)
        report.outer_candidates.add(joint.outer_candidates)
        joint_nodes.append(joint.nodes_visited)
        bad = not _agrees(joint, ref)
        if multigroup:
            mg = multigroup_decode(inst.channel, sig, inst.y)
            report.group_outer_candidates.add(tuple(p.outer_candidates for p in mg.per_group))
            group_nodes.append(mg.nodes_visited)
            bad |= not _agrees(mg, ref)
        report.mismatches += bad
        report.errors_vs_truth += not np.array_equal(ref.s_hat, inst.s_true)
    report.avg_nodes_joint = float(np.mean(joint_nodes))
    if group_nodes:
        report.avg_nodes_multigroup = float(np.mean(group_nodes))
    return report


@dataclass
class ScanReport:
    rows: list
    table_exponent: int | None
    predicted_group_exponents: tuple | None
    problems: list

    @property
    def ok(self):
        return not self.problems


def run_scan(family, m, q_list, trials, seed, snr_db=20.0, code=None):
    """Complexity scan plus consistency checks against the rank laws."""
    w = code if code is not None else build_family(family)
    rows = complexity_scan(w, m, q_list, trials, RandomSource(seed), snr_db=snr_db)
    problems = []
    table = None
    pred_exp = None
    if code is None:
        pred = predict_rank(family, m)
        table = table_exponent(family, m)
        pred_exp = pred.group_exponents
        if max(pred_exp) != table:
            problems.append(f"rank law exponents {pred_exp} disagree with closed form {table}")
        for row in rows:
            if row.k_primes_seen != (pred.total,):
                problems.append(f"q={row.q}: measured K' {row.k_primes_seen}, predicted {pred.total}")
            if tuple(row.group_exponents) != pred_exp:
                problems.append(f"q={row.q}: group exponents {row.group_exponents}, predicted {pred_exp}")
    for row in rows:
        if not row.outer_law_holds:
            problems.append(f"q={row.q}: outer candidate count broke q^(K-K')")
    return ScanReport(rows=rows, table_exponent=table, predicted_group_exponents=pred_exp,
                      problems=problems)
