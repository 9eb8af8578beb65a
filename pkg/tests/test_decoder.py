import numpy as np
import pytest

from stbclab.channel import EquivChannel, build_equiv_channel
from stbclab.codes import FamilyParams, build_family, herm_basis_code
from stbclab.decoder import (
    SCAN_CSV_HEADER,
    BudgetExceeded,
    SignalSet,
    brute_force_ml,
    complexity_scan,
    multigroup_decode,
    rank_deficient_decode,
    scan_csv,
    simulate_transmission,
    sphere_decode,
)
from stbclab.linalg import RandomSource, sample_channel


def exhaustive(g, alphabet, y):
    """Reference ML by direct enumeration of every candidate."""
    k = g.shape[1]
    grids = np.array(np.meshgrid(*[alphabet] * k, indexing="ij")).reshape(k, -1).T
    cost = np.sum((y[None, :] - grids @ g.T) ** 2, axis=1)
    best = cost.min()
    ties = grids[cost <= best * (1 + 1e-9)]
    return ties[np.lexsort(ties.T[::-1])][0], best


def test_signal_set():
    sig = SignalSet(4)
    assert list(sig.alphabet) == [-3, -1, 1, 3]
    assert sig.variance == pytest.approx(np.mean(sig.alphabet ** 2))
    with pytest.raises(ValueError):
        SignalSet(1)
    with pytest.raises(ValueError):
        SignalSet(2, theta=np.ones((2, 2)))
    with pytest.raises(ValueError):
        SignalSet(2, theta=np.eye(2)).generator(3)


def test_simulate_noiseless():
    w = herm_basis_code(2)
    rs = RandomSource(0)
    sig = SignalSet(2)
    inst = simulate_transmission(w, sig, sample_channel(2, 2, rs), float("inf"), rs)
    assert inst.noise_var == 0.0
    assert np.allclose(inst.y, inst.channel.g @ inst.s_true)
    with pytest.raises(ValueError):
        simulate_transmission(w, sig, sample_channel(2, 2, rs), float("nan"), rs)


def test_simulate_noise_scale():
    w = herm_basis_code(2)
    rs = RandomSource(0)
    sig = SignalSet(2)
    h = sample_channel(2, 1, rs)
    a = simulate_transmission(w, sig, h, 0.0, rs)
    b = simulate_transmission(w, sig, h, 10.0, rs)
    assert a.noise_var == pytest.approx(10 * b.noise_var)


@pytest.mark.parametrize("q", [2, 4])
def test_sphere_decode_full_rank_matches_exhaustive(q):
    rs = np.random.default_rng(q)
    sig = SignalSet(q)
    for _ in range(20):
        r = np.triu(rs.standard_normal((4, 4))) + 3 * np.eye(4)
        z = rs.standard_normal(4) * q
        res = sphere_decode(r, z, sig)
        s, c = exhaustive(r, sig.alphabet, z)
        assert np.array_equal(res.s_hat, s)
        assert res.cost == pytest.approx(c)
        assert res.nodes_visited >= 4


def test_sphere_decode_rejects_singular():
    with pytest.raises(ValueError):
        sphere_decode(np.zeros((2, 2)), np.zeros(2), SignalSet(2))


@pytest.mark.parametrize("m,q", [(1, 2), (1, 4), (2, 2)])
def test_rank_deficient_matches_exhaustive(m, q):
    w = herm_basis_code(2)
    sig = SignalSet(q)
    rs = RandomSource(100 + m * 10 + q)
    for i in range(15):
        c = rs.child(i)
        inst = simulate_transmission(w, sig, sample_channel(2, m, c), 5.0, c)
        res = rank_deficient_decode(inst.channel, sig, inst.y)
        s, cost = exhaustive(inst.channel.g, sig.alphabet, inst.y)
        assert np.array_equal(res.s_hat, s)
        assert res.cost == pytest.approx(cost, rel=1e-9)
        assert res.outer_candidates == q ** (w.k - res.k_prime)


def test_lexicographic_tie_break():
    # two identical columns: s and its swap always tie
    g = np.array([[1.0, 1.0], [0.0, 0.0]])
    ec = EquivChannel(g=g, groups=((0, 1),), m=1)
    sig = SignalSet(2)
    y = np.array([0.0, 0.0])
    for res in (rank_deficient_decode(ec, sig, y), brute_force_ml(ec, sig, y)):
        assert list(res.s_hat) == [-1, 1]


def test_generator_matrix_is_applied():
    w = herm_basis_code(2)
    rs = RandomSource(3)
    theta = np.eye(4) + 0.3 * np.triu(np.ones((4, 4)), 1)
    sig = SignalSet(2, theta=theta)
    inst = simulate_transmission(w, sig, sample_channel(2, 2, rs), float("inf"), rs)
    assert np.allclose(inst.y, inst.channel.g @ theta @ inst.s_true)
    res = rank_deficient_decode(inst.channel, sig, inst.y)
    assert np.array_equal(res.s_hat, inst.s_true)
    assert res.cost == pytest.approx(0.0, abs=1e-18)


def test_brute_force_budget():
    w = herm_basis_code(4)
    ec = build_equiv_channel(w, sample_channel(4, 1, RandomSource(0)))
    with pytest.raises(BudgetExceeded):
        brute_force_ml(ec, SignalSet(4), np.zeros(ec.g.shape[0]), budget=1000)


def test_multigroup_matches_joint():
    w = build_family(FamilyParams("natarajan-g2", n=2))
    sig = SignalSet(2)
    rs = RandomSource(8)
    for i in range(5):
        c = rs.child(i)
        inst = simulate_transmission(w, sig, sample_channel(4, 1, c), 8.0, c)
        joint = rank_deficient_decode(inst.channel, sig, inst.y)
        mg = multigroup_decode(inst.channel, sig, inst.y)
        assert np.array_equal(joint.s_hat, mg.s_hat)
        assert len(mg.per_group) == 2
        assert mg.outer_candidates == sum(p.outer_candidates for p in mg.per_group)


def test_multigroup_rejects_coupling_generator():
    w = build_family(FamilyParams("natarajan-g2", n=2))
    ec = build_equiv_channel(w, sample_channel(4, 2, RandomSource(0)))
    sig = SignalSet(2, theta=np.eye(w.k) + np.eye(w.k, k=1) * 0.5)
    with pytest.raises(ValueError):
        multigroup_decode(ec, sig, np.zeros(ec.g.shape[0]))


def test_multigroup_rejects_non_orthogonal_groups():
    ec = EquivChannel(g=np.array([[1.0, 1.0], [0.0, 1.0]]), groups=((0,), (1,)), m=1)
    with pytest.raises(ValueError):
        multigroup_decode(ec, SignalSet(2), np.zeros(2))


def test_complexity_scan_outer_law():
    w = herm_basis_code(3)
    rows = complexity_scan(w, 2, [2, 4], 3, RandomSource(0))
    assert [r.outer_candidates for r in rows] == [2, 4]
    assert all(r.outer_law_holds and r.k_prime == 8 for r in rows)
    text = scan_csv(rows)
    assert text.splitlines()[0] == ",".join(SCAN_CSV_HEADER)
