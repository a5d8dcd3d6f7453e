"""Partitions of sequence indices and separation statistics.

A partition of items 0..M-1 is stored in canonical form: blocks sorted
internally, blocks ordered by their smallest member.  Equality is
label-free, two partitions are equal iff they group the same indices.

The separation statistics over a distance matrix and a partition:

* min_intercluster: smallest distance between items of different blocks.
* max_intracluster: largest distance between items of the same block.
* split_bottleneck: largest over blocks of the worst-case bipartition
  bottleneck, i.e. the distance below which every block stays connected.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.blocks or any(len(b) == 0 for b in self.blocks):
            raise ValueError("blocks must be nonempty")
        canon = tuple(sorted((tuple(sorted(b)) for b in self.blocks),
                             key=lambda b: b[0]))
        members = [i for b in canon for i in b]
        if sorted(members) != list(range(len(members))):
            raise ValueError("blocks must cover 0..M-1 exactly once")
        object.__setattr__(self, "blocks", canon)

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        lab = np.asarray(labels)
        if lab.ndim != 1 or lab.size == 0:
            raise ValueError("labels must be a nonempty 1-d array")
        groups: dict = {}
        for idx, val in enumerate(lab.tolist()):
            groups.setdefault(val, []).append(idx)
        return cls(tuple(tuple(g) for g in groups.values()))

    @classmethod
    def from_blocks(cls, blocks) -> "Partition":
        return cls(tuple(tuple(b) for b in blocks))

    @property
    def n_items(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def n_clusters(self) -> int:
        return len(self.blocks)

    def labels(self) -> np.ndarray:
        """Block index of each item, 0-based, in canonical block order."""
        lab = np.empty(self.n_items, dtype=np.int64)
        for k, block in enumerate(self.blocks):
            lab[list(block)] = k
        return lab


def partitions_equal(p, q) -> bool:
    """Label-free equality; accepts Partition objects or label arrays."""
    if not isinstance(p, Partition):
        p = Partition.from_labels(p)
    if not isinstance(q, Partition):
        q = Partition.from_labels(q)
    return p.blocks == q.blocks


def check_distance_matrix(dm) -> np.ndarray:
    """Validate a distance matrix: square, finite, symmetric, zero diagonal."""
    arr = np.asarray(dm, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError("distance matrix must cover at least 2 items")
    if not np.isfinite(arr).all():
        raise ValueError("distance matrix contains non-finite values")
    if (arr < 0).any():
        raise ValueError("distance matrix contains negative values")
    if np.abs(np.diag(arr)).max() > 1e-9:
        raise ValueError("distance matrix diagonal must be zero")
    if np.abs(arr - arr.T).max() > 1e-9:
        raise ValueError("distance matrix must be symmetric")
    return arr


def _check_pair(dm, partition: Partition):
    arr = check_distance_matrix(dm)
    if partition.n_items != arr.shape[0]:
        raise ValueError(f"partition covers {partition.n_items} items, "
                         f"matrix has {arr.shape[0]}")
    return arr


def min_intercluster(dm, partition: Partition) -> float:
    """Smallest distance across block boundaries; needs >= 2 blocks."""
    arr = _check_pair(dm, partition)
    if partition.n_clusters < 2:
        raise ValueError("min_intercluster needs at least 2 blocks")
    lab = partition.labels()
    cross = lab[:, None] != lab[None, :]
    return float(arr[cross].min())


def max_intracluster(dm, partition: Partition) -> float:
    """Largest within-block distance; 0.0 when all blocks are singletons."""
    arr = _check_pair(dm, partition)
    best = 0.0
    for block in partition.blocks:
        if len(block) > 1:
            idx = np.asarray(block)
            best = max(best, float(arr[np.ix_(idx, idx)].max()))
    return best


def _mst_max_edge(sub: np.ndarray) -> float:
    """Largest edge of a minimum spanning tree (Prim, O(s^2))."""
    s = sub.shape[0]
    if s <= 1:
        return 0.0
    in_tree = np.zeros(s, dtype=bool)
    in_tree[0] = True
    best = sub[0].copy()
    worst = 0.0
    for _ in range(s - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        worst = max(worst, float(cand[j]))
        in_tree[j] = True
        np.minimum(best, sub[j], out=best)
    return worst


def _split_bottleneck_one_exact(sub: np.ndarray) -> float:
    s = sub.shape[0]
    if s <= 1:
        return 0.0
    if s > 20:
        raise ValueError("cluster too large for brute-force bipartitions (> 20)")
    worst = 0.0
    # item 0 is pinned to one side; masks then enumerate each unordered
    # bipartition exactly once
    for mask in range(1, 1 << (s - 1)):
        side_b = [i + 1 for i in range(s - 1) if mask >> i & 1]
        side_a = [i for i in range(s) if i not in side_b]
        worst = max(worst, float(sub[np.ix_(side_a, side_b)].min()))
    return worst


def split_bottleneck_exact(dm, partition: Partition) -> float:
    """Worst bipartition bottleneck by enumeration; blocks capped at 20."""
    arr = _check_pair(dm, partition)
    best = 0.0
    for block in partition.blocks:
        idx = np.asarray(block)
        best = max(best, _split_bottleneck_one_exact(arr[np.ix_(idx, idx)]))
    return best


def split_bottleneck(dm, partition: Partition) -> float:
    """Worst bipartition bottleneck via spanning trees.

    For one block, the worst-case bipartition bottleneck equals the largest
    edge of a minimum spanning tree: every bipartition is crossed by some
    tree edge (so no bottleneck exceeds the tree's largest edge), and
    cutting the largest tree edge yields a bipartition whose cheapest
    crossing is that edge (the cut property rules out anything cheaper).
    """
    arr = _check_pair(dm, partition)
    best = 0.0
    for block in partition.blocks:
        idx = np.asarray(block)
        best = max(best, _mst_max_edge(arr[np.ix_(idx, idx)]))
    return best


@dataclass(frozen=True)
class SeparationReport:
    min_intercluster: float
    max_intracluster: float
    split_bottleneck: float
    cluster_diameters: tuple[float, ...]
    cluster_bottlenecks: tuple[float, ...]


def separation_report(dm, partition: Partition) -> SeparationReport:
    """All separation statistics for one matrix/partition pair."""
    arr = _check_pair(dm, partition)
    diameters = []
    bottlenecks = []
    for block in partition.blocks:
        idx = np.asarray(block)
        sub = arr[np.ix_(idx, idx)]
        diameters.append(float(sub.max()) if len(block) > 1 else 0.0)
        bottlenecks.append(_mst_max_edge(sub))
    return SeparationReport(
        min_intercluster=min_intercluster(arr, partition),
        max_intracluster=max(diameters) if diameters else 0.0,
        split_bottleneck=max(bottlenecks) if bottlenecks else 0.0,
        cluster_diameters=tuple(diameters),
        cluster_bottlenecks=tuple(bottlenecks),
    )
