"""Clustering of a distance matrix: single/complete linkage and k-medoids.

The agglomerative methods start from singletons and repeatedly merge the
closest pair of clusters, with cluster distance being the minimum (single
linkage) or maximum (complete linkage) over member pairs.  They stop either
at a known cluster count or at a distance threshold.  Ties on the closest
pair resolve to the lexicographically smallest row pair, so results are
deterministic.

k-medoids is the usual PAM scheme: random distinct medoids, nearest-medoid
assignment, best-improvement swaps until convergence, best of several
restarts.  It needs a cluster count and a random generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import Partition, check_distance_matrix


@njit(cache=True)
def _agglomerate(work, k_stop, d_stop, complete):
    # work is mutated in place; k_stop=0 disables the count rule and
    # d_stop<0 disables the threshold rule
    m = work.shape[0]
    lab = np.arange(m)
    active = np.ones(m, dtype=np.bool_)
    merge_i = np.empty(m - 1, dtype=np.int64)
    merge_j = np.empty(m - 1, dtype=np.int64)
    merge_d = np.empty(m - 1, dtype=np.float64)
    n_merges = 0
    n_active = m
    gap = np.inf
    prev = -np.inf
    mono = True
    while n_active > 1:
        best = np.inf
        bi = -1
        bj = -1
        for i in range(m):
            if not active[i]:
                continue
            for j in range(i + 1, m):
                if active[j] and work[i, j] < best:
                    best = work[i, j]
                    bi = i
                    bj = j
        if k_stop > 0 and n_active <= k_stop:
            gap = best
            break
        if d_stop >= 0.0 and best >= d_stop:
            gap = best
            break
        if best < prev:
            mono = False
        prev = best
        for t in range(m):
            if active[t] and t != bi and t != bj:
                if complete:
                    v = max(work[bi, t], work[bj, t])
                else:
                    v = min(work[bi, t], work[bj, t])
                work[bi, t] = v
                work[t, bi] = v
        active[bj] = False
        for t in range(m):
            if lab[t] == bj:
                lab[t] = bi
        merge_i[n_merges] = bi
        merge_j[n_merges] = bj
        merge_d[n_merges] = best
        n_merges += 1
        n_active -= 1
    return (lab, merge_i[:n_merges], merge_j[:n_merges], merge_d[:n_merges],
            gap, mono)


@dataclass(frozen=True)
class LinkageResult:
    """Outcome of an agglomerative run.

    merges lists the executed merges as (i, j, distance) with i < j the
    cluster representatives (smallest member index).  final_gap is the
    smallest between-cluster distance at the moment the run stopped, inf
    when everything collapsed into one cluster.
    """

    partition: Partition
    merges: tuple[tuple[int, int, float], ...]
    final_gap: float


def _stop_args(m: int, k, threshold):
    if (k is None) == (threshold is None):
        raise ValueError("give exactly one of k or threshold")
    if k is not None:
        k = int(k)
        if not 1 <= k <= m:
            raise ValueError(f"k must be in [1, {m}], got {k}")
        return k, -1.0
    d = float(threshold)
    if not (d >= 0.0) or not np.isfinite(d):
        raise ValueError("threshold must be finite and >= 0")
    return 0, d


def _run_agglomerative(dm, k, threshold, complete: bool) -> LinkageResult:
    arr = check_distance_matrix(dm)
    k_stop, d_stop = _stop_args(arr.shape[0], k, threshold)
    lab, mi, mj, md, gap, mono = _agglomerate(arr.copy(), k_stop, d_stop,
                                              complete)
    assert mono, "merge heights decreased"
    merges = tuple((int(a), int(b), float(d))
                   for a, b, d in zip(mi, mj, md))
    return LinkageResult(partition=Partition.from_labels(lab),
                         merges=merges, final_gap=float(gap))


def slink(dm, k=None, threshold=None) -> LinkageResult:
    """Single-linkage clustering of a distance matrix.

    Stops when `k` clusters remain, or (threshold mode) just before the
    first merge at distance >= threshold, so every executed merge is
    strictly below it.  Merge heights are nondecreasing.
    """
    return _run_agglomerative(dm, k, threshold, complete=False)


def clink(dm, k=None, threshold=None) -> LinkageResult:
    """Complete-linkage clustering; same stopping rules as `slink`."""
    return _run_agglomerative(dm, k, threshold, complete=True)


def _assign(arr, medoids):
    # ties go to the earliest medoid in the sorted array, i.e. the
    # smallest item index
    cols = arr[:, medoids]
    choice = np.argmin(cols, axis=1)
    cost = float(cols[np.arange(arr.shape[0]), choice].sum())
    return medoids[choice], cost


def kmedoids(dm, k, rng=None, restarts: int = 10, max_iter: int = 100) -> Partition:
    """Best-of-restarts PAM k-medoids on a distance matrix.

    Args:
        dm: square distance matrix.
        k: number of clusters, 1 <= k <= M.
        rng: seed or numpy Generator; drives medoid initialisation.
        restarts: independent initialisations; best final cost wins.
        max_iter: swap sweeps per restart.

    Returns:
        The partition induced by nearest-medoid assignment.
    """
    arr = check_distance_matrix(dm)
    m = arr.shape[0]
    k = int(k)
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    best_cost = np.inf
    best_assign = None
    for _ in range(restarts):
        medoids = np.sort(gen.choice(m, size=k, replace=False))
        assign, cost = _assign(arr, medoids)
        for _ in range(max_iter):
            improved = False
            cand_cost = cost
            cand_medoids = medoids
            for out_pos in range(k):
                for cand in range(m):
                    if cand in medoids:
                        continue
                    trial = medoids.copy()
                    trial[out_pos] = cand
                    trial.sort()
                    _, c = _assign(arr, trial)
                    if c < cand_cost - 1e-12:
                        cand_cost = c
                        cand_medoids = trial
                        improved = True
            if not improved:
                break
            medoids = cand_medoids
            assign, cost = _assign(arr, medoids)
        if cost < best_cost - 1e-12:
            best_cost = cost
            best_assign = assign
    return Partition.from_labels(best_assign)
