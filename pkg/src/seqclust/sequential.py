"""Sequential clustering with a shrinking stopping threshold.

Starting from two samples per sequence, the driver repeats: update the
pairwise distance matrix with one new sample per sequence, cluster with
single linkage at the known cluster count, and compute the smallest
between-cluster distance.  Sampling stops once that statistic reaches the
threshold c / n^alpha, which only ever shrinks, so well-separated inputs
stop early and the stopping time adapts to the data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import KernelSpec, KsdMatrixState, MmdMatrixState
from .geometry import Partition, min_intercluster
from .linkage import slink
from .sources import ArrayStream

# samples prefetched from each stream between steps
_CHUNK = 16


@dataclass(frozen=True)
class SeqConfig:
    """Run parameters: threshold scale/decay, cluster count, distance."""

    c: float
    k: int
    alpha: float = 0.5
    kind: str = "mmd"
    kernel: KernelSpec | None = None
    n_min: int = 3
    n_max: int = 10 ** 6

    def __post_init__(self):
        if not (self.c > 0):
            raise ValueError("c must be positive")
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must be in (0, 1]")
        if int(self.k) < 2:
            raise ValueError("k must be at least 2")
        if self.kind not in ("mmd", "ksd"):
            raise ValueError(f"unknown distance kind: {self.kind!r}")
        if not self.n_min >= 3:
            raise ValueError("n_min must be >= 3")
        if not self.n_max >= self.n_min:
            raise ValueError("n_max must be >= n_min")


@dataclass(frozen=True)
class SeqOutcome:
    """partition and n_stop from the stopping step; trace rows are
    (n, statistic, threshold) for every step from n=2 on; truncated is set
    when the sample cap or a finite stream ended the run instead of the
    stopping rule."""

    partition: Partition
    n_stop: int
    trace: tuple[tuple[int, float, float], ...]
    truncated: bool


def stop_threshold(n: int, c: float, alpha: float = 0.5) -> float:
    """Threshold value c / n^alpha; n >= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(c) / float(n) ** alpha


def test_statistic(matrix, partition: Partition) -> float:
    """Smallest between-cluster distance of the current clustering."""
    return min_intercluster(matrix, partition)


class _Buffered:
    """Pulls one sample at a time from a stream, prefetching blocks."""

    def __init__(self, stream):
        self._stream = stream
        self._block = None
        self._pos = 0

    def next(self):
        if self._block is None or self._pos >= len(self._block):
            self._block = np.asarray(self._stream.draw(_CHUNK), dtype=np.float64)
            self._pos = 0
            if len(self._block) == 0:
                return None
        row = self._block[self._pos]
        self._pos += 1
        return np.atleast_1d(row)


def slink_seq(streams, cfg: SeqConfig) -> SeqOutcome:
    """Run the sequential driver over M >= 2 sample streams.

    A stream is anything with draw(k) -> up to k samples (shorter or empty
    once exhausted); plain arrays are wrapped as finite streams.  Each step
    clusters first and evaluates the stopping rule from n_min on, so the
    returned partition is always the one computed at the stopping step.
    Exhausting a finite stream, or reaching n_max, returns the current
    state flagged truncated.
    """
    wrapped = [s if hasattr(s, "draw") else ArrayStream(s) for s in streams]
    m = len(wrapped)
    if m < 2:
        raise ValueError("need at least 2 streams")
    if not cfg.k <= m:
        raise ValueError(f"k={cfg.k} exceeds the {m} streams")
    bufs = [_Buffered(s) for s in wrapped]

    first = [b.next() for b in bufs]
    second = [b.next() for b in bufs]
    if any(v is None for v in first + second):
        raise ValueError("streams exhausted before two samples each")
    init = np.stack([np.stack([a, b]) for a, b in zip(first, second)])
    if cfg.kind == "mmd":
        state = MmdMatrixState(init, cfg.kernel)
    else:
        state = KsdMatrixState(init)

    n = 2
    trace = []
    while True:
        dm = state.matrix()
        res = slink(dm, k=cfg.k)
        threshold = stop_threshold(n, cfg.c, cfg.alpha)
        trace.append((n, res.final_gap, threshold))
        if n >= cfg.n_min and res.final_gap >= threshold:
            return SeqOutcome(res.partition, n, tuple(trace), False)
        if n >= cfg.n_max:
            return SeqOutcome(res.partition, n, tuple(trace), True)
        cols = [b.next() for b in bufs]
        if any(v is None for v in cols):
            return SeqOutcome(res.partition, n, tuple(trace), True)
        state.update(np.stack(cols))
        n += 1
