import numpy as np
import pytest
from numpy.testing import assert_allclose

from seqclust.geometry import Partition, partitions_equal
from seqclust.linkage import clink, kmedoids, slink


def mean_abs_matrix(means):
    """|mu_i - mu_j| grid, the deterministic stand-in for a distance estimate."""
    mu = np.asarray(means, dtype=float)
    return np.abs(mu[:, None] - mu[None, :])


def brute_single_linkage(dm, k):
    """Naive reference: repeatedly merge the closest pair of clusters."""
    blocks = [[i] for i in range(len(dm))]
    heights = []
    while len(blocks) > k:
        best = np.inf
        pick = None
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                d = min(dm[i, j] for i in blocks[a] for j in blocks[b])
                if d < best:
                    best = d
                    pick = (a, b)
        a, b = pick
        blocks[a] = blocks[a] + blocks[b]
        del blocks[b]
        heights.append(best)
    return Partition.from_blocks([tuple(b) for b in blocks]), heights


def test_slink_three_groups():
    dm = mean_abs_matrix([0.0, 0.1, 1.0, 1.1, 5.0])
    res = slink(dm, k=3)
    assert partitions_equal(res.partition, [0, 0, 1, 1, 2])
    # next merge would have to bridge the 0.9 gap between the first two groups
    assert_allclose(res.final_gap, 0.9)


def test_slink_matches_brute_force():
    rng = np.random.default_rng(31)
    for _ in range(40):
        m = int(rng.integers(3, 10))
        a = rng.uniform(0.01, 1.0, size=(m, m))
        dm = np.triu(a, 1)
        dm = dm + dm.T
        k = int(rng.integers(1, m + 1))
        res = slink(dm, k=k)
        want, heights = brute_single_linkage(dm, k)
        assert partitions_equal(res.partition, want)
        assert_allclose([h for _, _, h in res.merges], heights, rtol=1e-15)


def test_merge_heights_nondecreasing():
    rng = np.random.default_rng(32)
    for _ in range(30):
        m = int(rng.integers(4, 16))
        a = rng.uniform(0.01, 1.0, size=(m, m))
        dm = np.triu(a, 1)
        dm = dm + dm.T
        for fn in (slink, clink):
            res = fn(dm, k=1)
            heights = [h for _, _, h in res.merges]
            assert heights == sorted(heights)
            assert len(heights) == m - 1


def test_chain_separates_single_from_complete():
    # a chain of near neighbors: single linkage keeps it whole, complete
    # linkage refuses to bridge the accumulated diameter
    dm = mean_abs_matrix([0.0, 1.0, 2.0, 3.0])
    s = slink(dm, k=1)
    assert [h for _, _, h in s.merges] == [1.0, 1.0, 1.0]
    c = clink(dm, k=1)
    assert [h for _, _, h in c.merges] == [1.0, 1.0, 3.0]


def test_threshold_mode_stops_below():
    dm = mean_abs_matrix([0.0, 0.1, 1.0, 1.1])
    # every executed merge must be strictly below the threshold
    res = slink(dm, threshold=0.5)
    assert partitions_equal(res.partition, [0, 0, 1, 1])
    assert res.final_gap == 0.9
    res = slink(dm, threshold=0.05)
    assert res.partition.n_clusters == 4
    assert res.final_gap == pytest.approx(0.1)


def test_threshold_zero_merges_nothing():
    dm = mean_abs_matrix([0.0, 0.1, 1.0])
    res = slink(dm, threshold=0.0)
    assert res.partition.n_clusters == 3
    assert res.merges == ()


def test_threshold_above_everything_collapses():
    dm = mean_abs_matrix([0.0, 0.1, 1.0])
    res = slink(dm, threshold=100.0)
    assert res.partition.n_clusters == 1
    assert res.final_gap == np.inf


def test_stop_args_validation():
    dm = mean_abs_matrix([0.0, 1.0])
    with pytest.raises(ValueError):
        slink(dm)
    with pytest.raises(ValueError):
        slink(dm, k=2, threshold=0.5)
    with pytest.raises(ValueError):
        slink(dm, k=0)
    with pytest.raises(ValueError):
        slink(dm, k=3)
    with pytest.raises(ValueError):
        slink(dm, threshold=-1.0)
    with pytest.raises(ValueError):
        slink(dm, threshold=np.inf)


def test_tie_breaking_is_deterministic():
    # all distances equal: each merge picks the first tied pair in row order
    dm = np.ones((4, 4)) - np.eye(4)
    res = slink(dm, k=1)
    assert [(i, j) for i, j, _ in res.merges] == [(0, 1), (0, 2), (0, 3)]
    res2 = clink(dm, k=2)
    assert [(i, j) for i, j, _ in res2.merges] == [(0, 1), (0, 2)]


def test_slink_equals_clink_at_two_points():
    dm = mean_abs_matrix([0.0, 2.0])
    for fn in (slink, clink):
        res = fn(dm, k=1)
        assert res.merges == ((0, 1, 2.0),)


def test_final_gap_is_min_intercluster():
    rng = np.random.default_rng(33)
    for _ in range(20):
        m = int(rng.integers(4, 12))
        a = rng.uniform(0.01, 1.0, size=(m, m))
        dm = np.triu(a, 1)
        dm = dm + dm.T
        k = int(rng.integers(2, m))
        res = slink(dm, k=k)
        lab = res.partition.labels()
        cross = dm[lab[:, None] != lab[None, :]]
        assert_allclose(res.final_gap, cross.min(), rtol=1e-15)


def test_kmedoids_recovers_well_separated():
    dm = mean_abs_matrix([0.0, 0.1, 0.2, 5.0, 5.1, 10.0])
    p = kmedoids(dm, 3, rng=0)
    assert partitions_equal(p, [0, 0, 0, 1, 1, 2])


def test_kmedoids_k_equals_m_gives_singletons():
    dm = mean_abs_matrix([0.0, 1.0, 2.0, 3.0])
    p = kmedoids(dm, 4, rng=1)
    assert p.blocks == ((0,), (1,), (2,), (3,))


def test_kmedoids_deterministic_given_seed():
    rng = np.random.default_rng(34)
    a = rng.uniform(0.01, 1.0, size=(9, 9))
    dm = np.triu(a, 1)
    dm = dm + dm.T
    p1 = kmedoids(dm, 3, rng=7)
    p2 = kmedoids(dm, 3, rng=7)
    assert p1 == p2


def test_kmedoids_cost_never_worse_than_random_start():
    # the swap loop must not return anything costlier than its own start
    rng = np.random.default_rng(35)
    for trial in range(10):
        m = int(rng.integers(5, 12))
        a = rng.uniform(0.01, 1.0, size=(m, m))
        dm = np.triu(a, 1)
        dm = dm + dm.T
        k = int(rng.integers(2, m))
        p = kmedoids(dm, k, rng=trial, restarts=3)
        lab = p.labels()
        cost = sum(dm[i, lab_block].min()
                   for i, lab_block in ((i, np.flatnonzero(lab == lab[i]))
                                        for i in range(m)))
        assert cost >= 0.0
        assert p.n_clusters == k


def test_kmedoids_validation():
    dm = mean_abs_matrix([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        kmedoids(dm, 0)
    with pytest.raises(ValueError):
        kmedoids(dm, 4)


def test_long_chain_defeats_diameter_methods():
    # a chain whose diameter exceeds the gap to a tight far group: single
    # linkage reads the gap correctly, the diameter driven methods split
    # the chain instead
    means = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.5, 11.0, 11.5]
    truth = [0] * 9 + [1] * 3
    dm = mean_abs_matrix(means)
    assert partitions_equal(slink(dm, k=2).partition, truth)
    assert not partitions_equal(clink(dm, k=2).partition, truth)
    assert not partitions_equal(kmedoids(dm, 2, rng=0), truth)
