"""ML decoding over q-PAM signal sets.

Four decoders share one contract: minimise ``||y - G Theta s||^2`` over
integer vectors `s` drawn from the PAM alphabet, breaking (near-)ties in
favour of the lexicographically smallest `s`.

* :func:`brute_force_ml` enumerates everything and is the reference.
* :func:`sphere_decode` is a Schnorr-Euchner depth-first search on a
  full-rank upper-triangular system.
* :func:`rank_deficient_decode` handles rank(G) = K' < K by conditioning
  on each of the q^(K-K') values of the dependent symbols.
* :func:`multigroup_decode` runs the rank-deficient decoder separately on
  each mutually orthogonal group block.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .channel import ORTHOGONALITY_TOL, EquivChannel, build_equiv_channel, group_orthogonality
from .linalg import DEFAULT_RANK_TOL, numerical_rank, qr_decompose, sample_channel

__all__ = [
    "SignalSet",
    "DecodeResult",
    "TransmissionInstance",
    "ScanRow",
    "BudgetExceeded",
    "COST_RTOL",
    "simulate_transmission",
    "brute_force_ml",
    "sphere_decode",
    "rank_deficient_decode",
    "multigroup_decode",
    "complexity_scan",
    "scan_csv",
]

# costs closer than this (relative) count as ties
COST_RTOL = 1e-9
DEFAULT_BUDGET = 2 ** 20


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SignalSet:
    q: int
    theta: np.ndarray | None = None

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("PAM size must be at least 2")
        if self.theta is not None:
            th = np.array(self.theta, dtype=float)
            if th.ndim != 2 or th.shape[0] != th.shape[1]:
                raise ValueError("generator must be square")
            if numerical_rank(th) != th.shape[0]:
                raise ValueError("generator must be invertible")
            object.__setattr__(self, "theta", th)

    @property
    def alphabet(self):
        return np.arange(-(self.q - 1), self.q, 2)

    @property
    def variance(self):
        """Mean energy of a uniformly drawn alphabet point."""
        return (self.q * self.q - 1) / 3.0

    def generator(self, k):
        if self.theta is None:
            return np.eye(k)
        if self.theta.shape[0] != k:
            raise ValueError(f"generator is {self.theta.shape[0]} x {self.theta.shape[0]}, need {k}")
        return self.theta

    def restrict(self, idx):
        if self.theta is None:
            return self
        return SignalSet(self.q, self.theta[np.ix_(idx, idx)])


@dataclass
class DecodeResult:
    s_hat: np.ndarray
    cost: float
    nodes_visited: int
    outer_candidates: int = 1
    k_prime: int | None = None
    per_group: list | None = None


@dataclass
class TransmissionInstance:
    h: np.ndarray
    s_true: np.ndarray
    y: np.ndarray
    snr_db: float
    noise_var: float
    channel: EquivChannel = field(repr=False, default=None)


def _ties(a, b):
    return abs(a - b) <= COST_RTOL * max(abs(a), abs(b))


def simulate_transmission(w, sig, h, snr_db, rng):
    """Draw s uniformly from the alphabet and return y = G Theta s + noise.

    The noise variance per real dimension is the average received signal
    power per real dimension (over the alphabet, for this channel) divided
    by the linear SNR.  ``snr_db=inf`` gives a noiseless observation.
    """
    ec = build_equiv_channel(w, h)
    gt = ec.g @ sig.generator(ec.k)
    s = rng.generator.choice(sig.alphabet, size=ec.k)
    clean = gt @ s
    dims = gt.shape[0]
    if np.isinf(snr_db) and snr_db > 0:
        noise_var = 0.0
    else:
        if not np.isfinite(snr_db):
            raise ValueError("snr_db must be finite or +inf")
        signal = sig.variance * np.trace(gt.T @ gt) / dims
        noise_var = signal / 10.0 ** (snr_db / 10.0)
    noise = np.sqrt(noise_var) * rng.generator.standard_normal(dims)
    return TransmissionInstance(h=np.asarray(h, dtype=complex), s_true=s, y=clean + noise,
                                snr_db=snr_db, noise_var=noise_var, channel=ec)


def _lex_candidates(alphabet, k):
    """All of alphabet^k as rows, in lexicographic order."""
    q = len(alphabet)
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(q ** k)
    powers = q ** np.arange(k - 1, -1, -1)
    return alphabet[(idx[:, None] // powers) % q]


def brute_force_ml(ec, sig, y, budget=DEFAULT_BUDGET, chunk=256):
    """Exhaustive search over alphabet^K.

    The symbol vector is split into a head and a tail half; every pair is
    scored as ``|a|^2 + |b|^2 - 2 a.b`` with ``a = y - G_head s_head`` and
    ``b = G_tail s_tail``.  Candidates whose fast score is within rounding
    slack of the minimum are rescored as plain residuals before the
    tie-break, so the result is exactly the direct minimiser.
    """
    k = ec.k
    q = sig.q
    total = q ** k
    if total > budget:
        raise BudgetExceeded(f"{q}^{k} = {total} candidates exceeds budget {budget}")
    gt = ec.g @ sig.generator(k)
    alphabet = sig.alphabet
    y = np.asarray(y, dtype=float)

    k_tail = k // 2
    head = _lex_candidates(alphabet, k - k_tail)
    tail = _lex_candidates(alphabet, k_tail)
    a = y[None, :] - head @ gt[:, :k - k_tail].T
    b = tail @ gt[:, k - k_tail:].T
    a2 = np.einsum("ij,ij->i", a, a)
    b2 = np.einsum("ij,ij->i", b, b)
    slack = 1e-10 * (a2.max() + b2.max())

    fast = np.empty((len(head), len(tail)))
    for start in range(0, len(head), chunk):
        stop = start + chunk
        fast[start:stop] = a2[start:stop, None] + b2[None, :] - 2.0 * (a[start:stop] @ b.T)
    lo = fast.min()
    near = np.flatnonzero(fast.reshape(-1) <= lo + 2.0 * slack + COST_RTOL * abs(lo))

    cand = np.hstack([head[near // len(tail)], tail[near % len(tail)]])
    resid = y[None, :] - cand @ gt.T
    exact = np.einsum("ij,ij->i", resid, resid)
    best = exact.min()
    pick = int(np.flatnonzero(exact <= best + COST_RTOL * best)[0])
    return DecodeResult(s_hat=cand[pick].astype(np.int64), cost=float(exact[pick]),
                        nodes_visited=total, outer_candidates=1, k_prime=numerical_rank(gt))


class _Search:
    """Depth-first Schnorr-Euchner enumeration with a shared best bound.

    The bound (and the incumbent) survive across calls to :meth:`run`, so
    the outer loop of the rank-deficient decoder prunes against the best
    solution found for earlier conditioning values.
    """

    def __init__(self, alphabet):
        self.alphabet = np.asarray(alphabet)
        self.best_cost = np.inf
        self.best_s = None
        self.nodes = 0

    def _limit(self):
        return self.best_cost + COST_RTOL * self.best_cost

    def _offer(self, cost, s):
        if self.best_s is None or cost < self.best_cost and not _ties(cost, self.best_cost):
            self.best_cost, self.best_s = cost, s
        elif _ties(cost, self.best_cost) and tuple(s) < tuple(self.best_s):
            self.best_cost, self.best_s = min(cost, self.best_cost), s

    def run(self, r, z, offset=0.0, assemble=None):
        """Search ``offset + ||z - r s||^2``; `assemble` maps the partial
        solution to the vector used for tie-breaking and reporting."""
        kk = len(z)
        s = np.zeros(kk, dtype=np.int64)
        diag = np.diag(r)
        alphabet = self.alphabet

        def descend(level, partial):
            if level < 0:
                full = s.copy() if assemble is None else assemble(s)
                self._offer(offset + partial, full)
                return
            center = (z[level] - r[level, level + 1:] @ s[level + 1:]) / diag[level]
            order = sorted(alphabet.tolist(), key=lambda a: (abs(a - center), a))
            for a in order:
                self.nodes += 1
                cand = offset + partial + (diag[level] * (center - a)) ** 2
                if cand > self._limit():
                    break
                s[level] = a
                descend(level - 1, cand - offset)
            s[level] = 0

        if offset > self._limit():
            return
        descend(kk - 1, 0.0)


def sphere_decode(r, z, sig):
    """Exact ML over the alphabet for a full-rank upper-triangular system."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] != len(z):
        raise ValueError("sphere_decode needs a square r matching z")
    if np.any(np.diag(r) == 0.0):
        raise ValueError("singular diagonal entry in r")
    search = _Search(sig.alphabet)
    search.run(r, z)
    s_hat = np.asarray(search.best_s, dtype=np.int64)
    resid = z - r @ s_hat
    return DecodeResult(s_hat=s_hat, cost=float(resid @ resid), nodes_visited=search.nodes,
                        outer_candidates=1, k_prime=len(z))


def _babai_costs(r, targets, alphabet):
    """Cost of the successive-cancellation leaf for each row of `targets`."""
    n, kk = targets.shape
    s = np.zeros((n, kk))
    cost = np.zeros(n)
    lo, hi = alphabet[0], alphabet[-1]
    for level in range(kk - 1, -1, -1):
        center = (targets[:, level] - s[:, level + 1:] @ r[level, level + 1:]) / r[level, level]
        pick = np.clip(lo + 2.0 * np.round((center - lo) / 2.0), lo, hi)
        s[:, level] = pick
        cost += (r[level, level] * (center - pick)) ** 2
    return cost


def rank_deficient_decode(ec, sig, y, rel_tol=DEFAULT_RANK_TOL):
    """ML decoding when rank(G Theta) = K' may be below K.

    Pivoted QR puts K' independent columns first, R = [R_a R_b].  For each
    of the q^(K-K') values of the trailing symbols s_b the interference
    R_b s_b is removed and the K'-dimensional system in R_a is searched.
    """
    k = ec.k
    gt = ec.g @ sig.generator(k)
    y = np.asarray(y, dtype=float)
    kp = numerical_rank(gt, rel_tol)
    f = qr_decompose(gt, pivoting=True)
    perm = f.permutation
    zfull = f.q.T @ y
    ra = f.r[:kp, :kp]
    rb = f.r[:kp, kp:]
    z = zfull[:kp]
    offset = float(zfull[kp:] @ zfull[kp:])

    alphabet = sig.alphabet
    search = _Search(alphabet)
    outer_set = _lex_candidates(alphabet, k - kp)
    targets = z[None, :] - outer_set @ rb.T
    # best-first: visiting the outer values with the cheapest Babai leaf
    # first gives the shared bound a good incumbent before the long tail
    order = np.argsort(_babai_costs(ra, targets, alphabet), kind="stable")
    search.nodes += len(outer_set) * kp
    outer = 0
    for idx in order:
        outer += 1
        sb = outer_set[idx]

        def assemble(sa, sb=sb):
            out = np.empty(k, dtype=np.int64)
            out[perm[:kp]] = sa
            out[perm[kp:]] = sb
            return out

        search.run(ra, targets[idx], offset, assemble)

    s_hat = np.asarray(search.best_s, dtype=np.int64)
    resid = y - gt @ s_hat
    return DecodeResult(s_hat=s_hat, cost=float(resid @ resid), nodes_visited=search.nodes,
                        outer_candidates=outer, k_prime=kp)


def _is_group_block_diagonal(theta, groups):
    label = np.empty(theta.shape[0], dtype=int)
    for gi, grp in enumerate(groups):
        label[list(grp)] = gi
    coupled = label[:, None] != label[None, :]
    return not np.any(theta[coupled] != 0.0)


def multigroup_decode(ec, sig, y, rel_tol=DEFAULT_RANK_TOL):
    """Decode each group block independently and stitch the estimates."""
    if len(ec.groups) > 1:
        orth = group_orthogonality(ec)
        if orth >= ORTHOGONALITY_TOL:
            raise ValueError(f"group blocks are not orthogonal (max |cos| = {orth:.3e})")
    theta = sig.generator(ec.k)
    if not _is_group_block_diagonal(theta, ec.groups):
        raise ValueError("generator couples symbols of different groups")
    y = np.asarray(y, dtype=float)
    s_hat = np.empty(ec.k, dtype=np.int64)
    parts = []
    for grp in ec.groups:
        idx = list(grp)
        sub = EquivChannel(g=ec.g[:, idx], groups=(tuple(range(len(idx))),), m=ec.m)
        res = rank_deficient_decode(sub, sig.restrict(idx), y, rel_tol)
        s_hat[idx] = res.s_hat
        parts.append(res)
    resid = y - ec.g @ theta @ s_hat
    return DecodeResult(
        s_hat=s_hat,
        cost=float(resid @ resid),
        nodes_visited=sum(p.nodes_visited for p in parts),
        outer_candidates=sum(p.outer_candidates for p in parts),
        k_prime=sum(p.k_prime for p in parts),
        per_group=parts,
    )


@dataclass
class ScanRow:
    code: str
    n: int
    t: int
    k: int
    m: int
    q: int
    k_prime: int
    exponent: int
    group_exponents: tuple
    outer_candidates: float
    avg_nodes: float
    trials: int
    seed: int
    outer_law_holds: bool
    k_primes_seen: tuple = ()

    def csv_row(self):
        return [self.code, self.n, self.t, self.k, self.m, self.q, self.k_prime, self.exponent,
                _fmt(self.outer_candidates), f"{self.avg_nodes:.3f}", self.trials, self.seed]


SCAN_CSV_HEADER = ["code", "N", "T", "K", "M", "q", "K_prime", "exponent",
                   "outer_candidates", "avg_nodes", "trials", "seed"]


def _fmt(x):
    return str(int(x)) if float(x).is_integer() else f"{x:.3f}"


def complexity_scan(w, m, q_list, trials, rng, snr_db=20.0, multigroup=None):
    """Average decoder work per constellation size.

    Multigroup sets (g > 1) are decoded group by group unless
    ``multigroup=False``.  `exponent` is the largest per-group K - K'
    (for a single group, plain K - K'); every decode is checked against
    the exact law outer_candidates = sum over groups of q^(group exponent).
    Trial i of every q uses the channel and symbols of ``rng.child(i)``.
    """
    if multigroup is None:
        multigroup = w.g > 1
    rows = []
    for q in q_list:
        sig = SignalSet(q)
        nodes = []
        outers = []
        law = True
        kps = set()
        gexp_seen = set()
        for i in range(trials):
            child = rng.child(i)
            h = sample_channel(w.n, m, child)
            inst = simulate_transmission(w, sig, h, snr_db, child)
            if multigroup:
                res = multigroup_decode(inst.channel, sig, inst.y)
                gexp = tuple(len(grp) - p.k_prime for grp, p in zip(w.groups, res.per_group))
            else:
                res = rank_deficient_decode(inst.channel, sig, inst.y)
                gexp = (w.k - res.k_prime,)
            law &= res.outer_candidates == sum(q ** e for e in gexp)
            nodes.append(res.nodes_visited)
            outers.append(res.outer_candidates)
            kps.add(res.k_prime)
            gexp_seen.add(gexp)
        gexp = max(gexp_seen)
        kp = w.k - sum(gexp)
        rows.append(ScanRow(code=w.name, n=w.n, t=w.t, k=w.k, m=m, q=q, k_prime=kp,
                            exponent=max(gexp), group_exponents=gexp,
                            outer_candidates=float(np.mean(outers)), avg_nodes=float(np.mean(nodes)),
                            trials=trials, seed=rng.seed, outer_law_holds=law,
                            k_primes_seen=tuple(sorted(kps))))
    return rows


def scan_csv(rows, extra=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(SCAN_CSV_HEADER)
    if extra:
        header += list(extra[0].keys())
    writer.writerow(header)
    for i, row in enumerate(rows):
        out = row.csv_row()
        if extra:
            out += list(extra[i].values())
        writer.writerow(out)
    return buf.getvalue()
