"""Synthetic sequence sources, bundled example problems, CSV ingestion.

Sources draw i.i.d. scalar samples from a Gaussian or a Gaussian mixture.
Five ready-made example problems pair source lists with their true
partition and published reference separations.  `ingest_csv` reads
user-provided (possibly multi-dimensional) sequences from disk.

Seeding: every sequence of every trial gets its own generator derived from
the master seed and an integer key path, so streams are reproducible and
independent of scheduling order.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .geometry import Partition


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (domain, point, trial, ...) key path."""
    return np.random.default_rng(np.random.SeedSequence(master_seed,
                                                        spawn_key=tuple(key)))


@dataclass(frozen=True)
class GaussianSource:
    mean: float
    variance: float = 1.0

    def __post_init__(self):
        if not (self.variance > 0):
            raise ValueError("variance must be positive")

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """One draw (size=None) or a 1-d array of draws."""
        return rng.normal(self.mean, np.sqrt(self.variance), size=size)


@dataclass(frozen=True)
class MixtureSource:
    """Gaussian mixture; components are (mean, variance, weight) triples."""

    components: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        comps = tuple((float(m), float(v), float(w)) for m, v, w in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(v <= 0 for _, v, _ in comps):
            raise ValueError("variance must be positive")
        if any(w <= 0 for _, _, w in comps):
            raise ValueError("weights must be positive")
        if abs(sum(w for _, _, w in comps) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "components", comps)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        means = np.array([m for m, _, _ in self.components])
        sds = np.sqrt([v for _, v, _ in self.components])
        weights = np.array([w for _, _, w in self.components])
        k = 1 if size is None else int(size)
        comp = rng.choice(len(self.components), size=k, p=weights)
        draws = means[comp] + sds[comp] * rng.standard_normal(k)
        return float(draws[0]) if size is None else draws


Source = GaussianSource | MixtureSource


def sample(source: Source, rng: np.random.Generator):
    """One draw from a source."""
    return source.sample(rng)


class SourceStream:
    """Endless sample stream: one source bound to one generator."""

    def __init__(self, source: Source, rng: np.random.Generator):
        self.source = source
        self.rng = rng

    def draw(self, k: int) -> np.ndarray:
        return np.atleast_1d(self.source.sample(self.rng, size=k))


class ArrayStream:
    """Finite stream over a fixed array; returns a short block when drained."""

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=np.float64)
        if arr.ndim == 0 or arr.size == 0:
            raise ValueError("stream needs a nonempty 1-d or 2-d array")
        self._arr = arr
        self._pos = 0

    def draw(self, k: int) -> np.ndarray:
        block = self._arr[self._pos:self._pos + k]
        self._pos += len(block)
        return block


@dataclass(frozen=True)
class ExampleSpec:
    id: int
    sources: tuple[Source, ...]
    truth: Partition
    reference: dict = field(default_factory=dict)

    @property
    def n_sequences(self) -> int:
        return len(self.sources)

    @property
    def n_clusters(self) -> int:
        return self.truth.n_clusters


def _gaussian_cluster_means(*cluster_means):
    sources = []
    blocks = []
    at = 0
    for means in cluster_means:
        sources.extend(GaussianSource(m) for m in means)
        blocks.append(tuple(range(at, at + len(means))))
        at += len(means)
    return tuple(sources), Partition.from_blocks(blocks)


def _mixture_cluster_means(*cluster_pairs):
    sources = []
    blocks = []
    at = 0
    for pairs in cluster_pairs:
        sources.extend(MixtureSource(((m1, 1.0, 0.7), (m2, 1.0, 0.3)))
                       for m1, m2 in pairs)
        blocks.append(tuple(range(at, at + len(pairs))))
        at += len(pairs)
    return tuple(sources), Partition.from_blocks(blocks)


def _ref(d_l, d_h, d_i):
    return {"max_intracluster": d_l, "min_intercluster": d_h,
            "split_bottleneck": d_i}


def example(example_id: int) -> ExampleSpec:
    """One of the five bundled clustering problems.

    1: 2 unequal Gaussian clusters (9 + 3 sequences), overlapping spreads.
    2: 2 equal Gaussian clusters (5 + 5).
    3: 5 Gaussian clusters of 5 identical sequences each, unit mean steps.
    4: 2 clusters of 3 two-component Gaussian mixtures, nearly touching.
    5: like 4 with the second cluster pushed further out.

    All sources are scalar with unit variance.  `reference` holds the
    separation statistics of each problem estimated from long sequences
    (10000 samples, bandwidth 1), keyed by distance kind.
    """
    eid = int(example_id)
    if eid == 1:
        sources, truth = _gaussian_cluster_means(
            [0.4, 0.55, 0.7, 0.85, 1.0, 1.15, 1.3, 1.45, 1.6],
            [1.85, 2.0, 2.15])
        reference = {"mmd": _ref(0.49401, 0.11152, 0.06238),
                     "ksd": _ref(0.444, 0.0995, 0.0541)}
    elif eid == 2:
        sources, truth = _gaussian_cluster_means(
            [0.7, 0.85, 1.0, 1.15, 1.3],
            [1.7, 1.85, 2.0, 2.15, 2.3])
        reference = {"mmd": _ref(0.26219, 0.1665, 0.06238),
                     "ksd": _ref(0.2362, 0.1668, 0.0541)}
    elif eid == 3:
        sources, truth = _gaussian_cluster_means(
            *([float(k)] * 5 for k in range(5)))
        reference = {"mmd": _ref(0.0, 0.41289, 0.0),
                     "ksd": _ref(0.0, 0.3789, 0.0)}
    elif eid == 4:
        sources, truth = _mixture_cluster_means(
            [(-0.5, 0.0), (0.0, 0.5), (0.5, 1.0)],
            [(1.2, 1.7), (1.7, 2.2), (2.2, 2.7)])
        reference = {"mmd": _ref(0.41258, 0.25897, 0.24583)}
    elif eid == 5:
        sources, truth = _mixture_cluster_means(
            [(-0.5, 0.0), (0.0, 0.5), (0.5, 1.0)],
            [(1.35, 1.85), (1.85, 2.35), (2.35, 2.85)])
        reference = {"mmd": _ref(0.41258, 0.35536, 0.24583)}
    else:
        raise ValueError(f"example id must be 1..5, got {example_id}")
    return ExampleSpec(id=eid, sources=sources, truth=truth, reference=reference)


@dataclass(frozen=True)
class DataSequence:
    seq_id: str
    samples: np.ndarray  # (n, d)


def ingest_csv(path) -> list[DataSequence]:
    """Read sequences from a CSV file.

    Expected layout: header `seq_id,dim_0[,dim_1,...]`, then one sample per
    row; rows of one sequence are consecutive and in time order.  Raises
    ValueError on a missing/bad header, ragged or non-numeric rows, an
    interleaved seq_id, or a file with no data rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [c.strip() for c in header]
        dims = len(header) - 1
        if header[0] != "seq_id" or dims < 1 or \
                header[1:] != [f"dim_{i}" for i in range(dims)]:
            raise ValueError(f"{path}: header must be seq_id,dim_0[,dim_1,...]")
        order: list[str] = []
        rows: dict[str, list[list[float]]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != dims + 1:
                raise ValueError(f"{path}:{lineno}: expected {dims + 1} fields, "
                                 f"got {len(row)}")
            sid = row[0].strip()
            if not sid:
                raise ValueError(f"{path}:{lineno}: empty seq_id")
            try:
                values = [float(v) for v in row[1:]]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric sample") from None
            if sid in rows:
                if order[-1] != sid:
                    raise ValueError(f"{path}:{lineno}: rows for {sid!r} are "
                                     "not consecutive")
            else:
                order.append(sid)
                rows[sid] = []
            rows[sid].append(values)
        if not order:
            raise ValueError(f"{path}: no data rows")
    return [DataSequence(sid, np.asarray(rows[sid])) for sid in order]
