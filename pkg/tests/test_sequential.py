import numpy as np
import pytest
from numpy.testing import assert_allclose

from seqclust.distances import KernelSpec, pairwise_matrix
from seqclust.geometry import min_intercluster, partitions_equal
from seqclust.sequential import SeqConfig, SeqOutcome, slink_seq, stop_threshold
from seqclust.sequential import test_statistic as seq_statistic
from seqclust.sources import SourceStream, GaussianSource, example, substream


def example_streams(eid, seed):
    ex = example(eid)
    return [SourceStream(src, substream(seed, 0, s))
            for s, src in enumerate(ex.sources)], ex


def test_stop_threshold_values():
    assert stop_threshold(4, 4.0) == 2.0
    assert stop_threshold(4, 4.0, alpha=1.0) == 1.0
    assert stop_threshold(1, 1.0, alpha=0.5) == 1.0
    assert_allclose(stop_threshold(1000, 2.0, alpha=0.5), 2.0 / np.sqrt(1000))


def test_stop_threshold_decreasing_in_n():
    vals = [stop_threshold(n, 3.0, alpha=0.4) for n in range(1, 50)]
    assert vals == sorted(vals, reverse=True)


def test_stop_threshold_rejects_zero_n():
    with pytest.raises(ValueError):
        stop_threshold(0, 1.0)


def test_seq_config_validation():
    SeqConfig(c=1.0, k=2)
    with pytest.raises(ValueError):
        SeqConfig(c=0.0, k=2)
    with pytest.raises(ValueError):
        SeqConfig(c=1.0, k=1)
    with pytest.raises(ValueError):
        SeqConfig(c=1.0, k=2, alpha=0.0)
    with pytest.raises(ValueError):
        SeqConfig(c=1.0, k=2, alpha=1.5)
    with pytest.raises(ValueError):
        SeqConfig(c=1.0, k=2, kind="emd")
    with pytest.raises(ValueError):
        SeqConfig(c=1.0, k=2, n_min=2)
    with pytest.raises(ValueError):
        SeqConfig(c=1.0, k=2, n_min=5, n_max=4)


def test_statistic_is_smallest_cross_distance():
    dm = np.array([
        [0.0, 0.3, 0.9],
        [0.3, 0.0, 0.7],
        [0.9, 0.7, 0.0],
    ])
    from seqclust.geometry import Partition
    p = Partition.from_labels([0, 0, 1])
    assert seq_statistic(dm, p) == 0.7


def test_immediate_stop_on_easy_problem():
    # far apart sources and a tiny scale: the rule fires at the first
    # tested step
    streams = [SourceStream(GaussianSource(m), substream(1, s))
               for s, m in enumerate((0.0, 0.0, 20.0, 20.0))]
    out = slink_seq(streams, SeqConfig(c=1e-6, k=2))
    assert out.n_stop == 3
    assert not out.truncated
    assert partitions_equal(out.partition, [0, 0, 1, 1])
    assert [n for n, _, _ in out.trace] == [2, 3]


def test_trace_replays_the_run():
    streams, ex = example_streams(2, seed=5)
    cfg = SeqConfig(c=2.0, k=2)
    out = slink_seq(streams, cfg)
    ns = [n for n, _, _ in out.trace]
    assert ns == list(range(2, out.n_stop + 1))
    for n, stat, thr in out.trace:
        assert_allclose(thr, stop_threshold(n, cfg.c, cfg.alpha), rtol=1e-15)
        if cfg.n_min <= n < out.n_stop:
            assert stat < thr
    last_n, last_stat, last_thr = out.trace[-1]
    assert last_n == out.n_stop
    assert last_stat >= last_thr


def test_stopping_statistic_matches_batch_recompute():
    # replay the exact samples into the batch pipeline and compare the
    # final test statistic
    ex = example(2)
    n_probe = 40
    fixed = [src.sample(substream(11, 0, s), n_probe)
             for s, src in enumerate(ex.sources)]
    out = slink_seq([np.asarray(f) for f in fixed], SeqConfig(c=1.45, k=2))
    assert not out.truncated
    n = out.n_stop
    dm = pairwise_matrix([f[:n] for f in fixed], kind="mmd", method="exact")
    from seqclust.linkage import slink
    res = slink(dm, k=2)
    assert partitions_equal(res.partition, out.partition)
    stat = seq_statistic(dm, res.partition)
    assert_allclose(out.trace[-1][1], stat, rtol=1e-9)


def test_deterministic_given_seed():
    a = slink_seq(example_streams(3, seed=9)[0], SeqConfig(c=1.9, k=5))
    b = slink_seq(example_streams(3, seed=9)[0], SeqConfig(c=1.9, k=5))
    assert a == b


def test_truncation_by_sample_cap():
    streams, _ = example_streams(1, seed=3)
    out = slink_seq(streams, SeqConfig(c=50.0, k=2, n_max=12))
    assert out.truncated
    assert out.n_stop == 12
    assert out.trace[-1][0] == 12


def test_truncation_by_stream_exhaustion():
    rng = np.random.default_rng(44)
    rows = [rng.normal(size=9), rng.normal(loc=8.0, size=9), rng.normal(size=15)]
    out = slink_seq(rows, SeqConfig(c=1e9, k=2))
    assert out.truncated
    assert out.n_stop == 9


def test_rejects_exhaustion_before_start():
    with pytest.raises(ValueError):
        slink_seq([np.zeros(1), np.zeros(5)], SeqConfig(c=1.0, k=2))
    with pytest.raises(ValueError):
        slink_seq([np.zeros(5)], SeqConfig(c=1.0, k=2))


def test_k_larger_than_streams_rejected():
    with pytest.raises(ValueError):
        slink_seq([np.zeros(5), np.zeros(5)], SeqConfig(c=1.0, k=3))


def test_ksd_mode_runs():
    streams, ex = example_streams(3, seed=8)
    out = slink_seq(streams, SeqConfig(c=1.4, k=5, kind="ksd"))
    assert not out.truncated
    assert out.partition.n_clusters == 5
    # ksd values live in [0, 1], the trace must too
    assert all(0.0 <= stat <= 1.0 for _, stat, _ in out.trace)


def test_custom_kernel_is_used():
    rng = np.random.default_rng(45)
    rows = [rng.normal(size=30), rng.normal(loc=3.0, size=30)]
    narrow = slink_seq([r.copy() for r in rows],
                       SeqConfig(c=1e9, k=2, kernel=KernelSpec(bandwidth=0.2)))
    wide = slink_seq([r.copy() for r in rows],
                     SeqConfig(c=1e9, k=2, kernel=KernelSpec(bandwidth=5.0)))
    assert narrow.trace[-1][1] != wide.trace[-1][1]


def test_alpha_one_needs_larger_scale():
    # with alpha=1 the threshold decays fast, so the same scale stops later
    # or equal, never earlier, once converted to comparable units
    streams_a, _ = example_streams(2, seed=6)
    streams_b, _ = example_streams(2, seed=6)
    slow = slink_seq(streams_a, SeqConfig(c=2.0, k=2, alpha=0.5))
    fast = slink_seq(streams_b, SeqConfig(c=2.0, k=2, alpha=1.0))
    # same sample paths, smaller thresholds for alpha=1 from n >= 2 on
    assert fast.n_stop <= slow.n_stop
