"""Monte-Carlo experiment drivers and result emission.

run_fss sweeps sample sizes and estimates the error probability of a
fixed-sample clustering algorithm; run_seq sweeps threshold scales for the
sequential driver and also tracks the stopping time.  Results are plain
row dataclasses that `emit` writes as CSV or as two-column plot data.

Seeding: every (domain, point, trial, stream) gets its own generator
derived from the master seed, so results are reproducible and independent
of how trials are scheduled across workers.  Aggregation uses integer
counters only (errors, stopping-time sums), which makes the emitted CSV
byte-identical for any worker count, except the wall_ms column.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .bounds import BoundParams, seq_constants
from .distances import KernelSpec, pairwise_matrix
from .geometry import SeparationReport, partitions_equal, separation_report
from .linkage import clink, kmedoids, slink
from .sequential import SeqConfig, slink_seq
from .sources import SourceStream, example, substream

_DOM_FSS = 0
_DOM_SEQ = 1
_DOM_SEP = 2
_DOM_TUNE = 3

_FSS_TRIALS_DEFAULT = 5000
_SEQ_TRIALS_DEFAULT = 3000

_ALGO_ALIASES = {
    "slink": "slink", "slink_fss": "slink",
    "clink": "clink", "clink_fss": "clink",
    "kmedoids": "kmedoids", "kmedoids_fss": "kmedoids",
    "slink_seq": "slink_seq",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: problem, distance, algorithm, sweep, trial budget."""

    example: int | None = None
    csv: str | None = None
    distance: str = "mmd"
    bandwidth: float = 1.0
    algo: str = "slink"
    k: int | None = None
    n_values: tuple[int, ...] = ()
    c_values: tuple[float, ...] = ()
    alpha: float = 0.5
    trials: int = 0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.example is not None and int(self.example) not in (1, 2, 3, 4, 5):
            raise ValueError(f"example id must be 1..5, got {self.example}")
        if self.distance not in ("mmd", "ksd"):
            raise ValueError(f"unknown distance kind: {self.distance!r}")
        if not (self.bandwidth > 0):
            raise ValueError("bandwidth must be positive")
        if self.algo not in _ALGO_ALIASES:
            raise ValueError(f"unknown algorithm: {self.algo!r}")
        object.__setattr__(self, "algo", _ALGO_ALIASES[self.algo])
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must be in (0, 1]")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))


@dataclass(frozen=True)
class FssRow:
    example: str
    algo: str
    distance: str
    n: int
    trials: int
    errors: int
    p_e: float
    ln_p_e: float | None
    censored: bool
    wall_ms: float


@dataclass(frozen=True)
class SeqRow:
    example: str
    distance: str
    c: float
    alpha: float
    trials: int
    errors: int
    p_e: float
    ln_p_e: float | None
    censored: bool
    mean_n: float
    std_n: float
    truncated: int
    wall_ms: float


def _resolve_example(cfg: ExperimentConfig):
    if cfg.example is None:
        raise ValueError("this operation needs an example id (sources to resample)")
    return example(cfg.example)


def _fss_chunk(args):
    example_id, kind, bandwidth, n, algo, k, seed, point, t0, t1 = args
    spec = example(example_id)
    kspec = KernelSpec(bandwidth=bandwidth)
    m = len(spec.sources)
    errors = 0
    data = np.empty((m, n))
    for t in range(t0, t1):
        for s, src in enumerate(spec.sources):
            data[s] = src.sample(substream(seed, _DOM_FSS, point, t, s), n)
        dm = pairwise_matrix(data, kind=kind, spec=kspec)
        if algo == "kmedoids":
            part = kmedoids(dm, k, rng=substream(seed, _DOM_FSS, point, t, m))
        elif algo == "clink":
            part = clink(dm, k=k).partition
        else:
            part = slink(dm, k=k).partition
        if not partitions_equal(part, spec.truth):
            errors += 1
    return errors


def _seq_chunk(args):
    example_id, kind, bandwidth, c, alpha, k, seed, domain, point, t0, t1 = args
    spec = example(example_id)
    kernel = KernelSpec(bandwidth=bandwidth)
    run_cfg = SeqConfig(c=c, alpha=alpha, k=k, kind=kind, kernel=kernel)
    errors = 0
    sum_n = 0
    sum_n2 = 0
    truncated = 0
    for t in range(t0, t1):
        streams = [SourceStream(src, substream(seed, domain, point, t, s))
                   for s, src in enumerate(spec.sources)]
        out = slink_seq(streams, run_cfg)
        if not partitions_equal(out.partition, spec.truth):
            errors += 1
        sum_n += out.n_stop
        sum_n2 += out.n_stop * out.n_stop
        truncated += 1 if out.truncated else 0
    return errors, sum_n, sum_n2, truncated


def _chunk_ranges(trials: int, workers: int):
    n_chunks = min(trials, max(1, workers * 4))
    edges = np.linspace(0, trials, n_chunks + 1, dtype=int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_chunks(fn, arg_list, workers: int):
    if workers <= 1 or len(arg_list) <= 1:
        return [fn(a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=workers,
                             mp_context=get_context("spawn")) as pool:
        return list(pool.map(fn, arg_list))


def _error_fields(errors: int, trials: int):
    p_e = errors / trials
    censored = errors == 0
    return p_e, (None if censored else math.log(p_e)), censored


def run_fss(cfg: ExperimentConfig) -> list[FssRow]:
    """Error probability of a fixed-sample algorithm over a sweep of n."""
    spec = _resolve_example(cfg)
    if cfg.algo not in ("slink", "clink", "kmedoids"):
        raise ValueError(f"run_fss needs a fixed-sample algorithm, got {cfg.algo!r}")
    if not cfg.n_values:
        raise ValueError("n_values must be nonempty")
    if any(n < 1 for n in cfg.n_values):
        raise ValueError("n values must be >= 1")
    trials = cfg.trials or _FSS_TRIALS_DEFAULT
    k = cfg.k or spec.n_clusters
    rows = []
    for point, n in enumerate(cfg.n_values):
        start = time.perf_counter()
        args = [(spec.id, cfg.distance, cfg.bandwidth, n, cfg.algo, k,
                 cfg.seed, point, t0, t1)
                for t0, t1 in _chunk_ranges(trials, cfg.workers)]
        errors = sum(_run_chunks(_fss_chunk, args, cfg.workers))
        wall_ms = (time.perf_counter() - start) * 1e3
        p_e, ln_p_e, censored = _error_fields(errors, trials)
        rows.append(FssRow(example=str(spec.id), algo=cfg.algo,
                           distance=cfg.distance, n=n, trials=trials,
                           errors=errors, p_e=p_e, ln_p_e=ln_p_e,
                           censored=censored, wall_ms=wall_ms))
    return rows


def _seq_point(cfg: ExperimentConfig, spec, c: float, trials: int,
               domain: int, point: int):
    k = cfg.k or spec.n_clusters
    args = [(spec.id, cfg.distance, cfg.bandwidth, c, cfg.alpha, k,
             cfg.seed, domain, point, t0, t1)
            for t0, t1 in _chunk_ranges(trials, cfg.workers)]
    parts = _run_chunks(_seq_chunk, args, cfg.workers)
    errors = sum(p[0] for p in parts)
    sum_n = sum(p[1] for p in parts)
    sum_n2 = sum(p[2] for p in parts)
    truncated = sum(p[3] for p in parts)
    return errors, sum_n, sum_n2, truncated


def run_seq(cfg: ExperimentConfig) -> list[SeqRow]:
    """Error probability and stopping time of the sequential driver
    over a sweep of threshold scales."""
    spec = _resolve_example(cfg)
    if cfg.algo != "slink_seq":
        raise ValueError(f"run_seq needs the sequential algorithm, got {cfg.algo!r}")
    if not cfg.c_values:
        raise ValueError("c_values must be nonempty")
    if any(c <= 0 for c in cfg.c_values):
        raise ValueError("c values must be positive")
    trials = cfg.trials or _SEQ_TRIALS_DEFAULT
    rows = []
    for point, c in enumerate(cfg.c_values):
        start = time.perf_counter()
        errors, sum_n, sum_n2, truncated = _seq_point(cfg, spec, c, trials,
                                                      _DOM_SEQ, point)
        wall_ms = (time.perf_counter() - start) * 1e3
        p_e, ln_p_e, censored = _error_fields(errors, trials)
        mean_n = sum_n / trials
        var_n = max(0.0, sum_n2 / trials - mean_n * mean_n)
        rows.append(SeqRow(example=str(spec.id), distance=cfg.distance, c=c,
                           alpha=cfg.alpha, trials=trials, errors=errors,
                           p_e=p_e, ln_p_e=ln_p_e, censored=censored,
                           mean_n=mean_n, std_n=math.sqrt(var_n),
                           truncated=truncated, wall_ms=wall_ms))
    return rows


def estimate_separation(cfg: ExperimentConfig, n_ref: int = 10000) -> SeparationReport:
    """Separation statistics of an example estimated from long sequences."""
    spec = _resolve_example(cfg)
    if n_ref < 2:
        raise ValueError("n_ref must be >= 2")
    m = len(spec.sources)
    data = np.empty((m, n_ref))
    for s, src in enumerate(spec.sources):
        data[s] = src.sample(substream(cfg.seed, _DOM_SEP, 0, 0, s), n_ref)
    dm = pairwise_matrix(data, kind=cfg.distance,
                         spec=KernelSpec(bandwidth=cfg.bandwidth))
    return separation_report(dm, spec.truth)


def tune_scale(cfg: ExperimentConfig, target_mean_n: float, tol: float = 0.02,
               trials: int = 300, max_evals: int = 60) -> float:
    """Threshold scale whose mean stopping time hits a target within tol.

    Bisection over c: with the trial seeds held fixed across evaluations,
    every trajectory stops no earlier as c grows, so the mean stopping
    time is monotone in c and bisection is clean.
    """
    spec = _resolve_example(cfg)
    if not (target_mean_n > 3):
        raise ValueError("target mean stopping time must exceed n_min")
    cache: dict[float, float] = {}

    def mean_at(c: float) -> float:
        if c not in cache:
            _, sum_n, _, _ = _seq_point(cfg, spec, c, trials, _DOM_TUNE, 0)
            cache[c] = sum_n / trials
        return cache[c]

    ref = spec.reference.get(cfg.distance, {}).get("min_intercluster", 0.0)
    c = ref * target_mean_n ** cfg.alpha if ref > 0 else 1.0
    lo = hi = c
    while mean_at(hi) < target_mean_n and len(cache) < max_evals:
        lo = hi
        hi *= 2.0
    while mean_at(lo) > target_mean_n and len(cache) < max_evals:
        hi = lo
        lo /= 2.0
    best = min(cache, key=lambda cc: abs(cache[cc] - target_mean_n))
    while len(cache) < max_evals and hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        got = mean_at(mid)
        if abs(got - target_mean_n) < abs(cache[best] - target_mean_n):
            best = mid
        if abs(got - target_mean_n) <= tol * target_mean_n:
            return mid
        if got < target_mean_n:
            lo = mid
        else:
            hi = mid
    return best


def fit_slope(xs, ys) -> float:
    """Least-squares slope of ys against xs."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size or xs.size < 2:
        raise ValueError("need at least two (x, y) points")
    return float(np.polyfit(xs, ys, 1)[0])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def bound_table(entries) -> str:
    """CSV table of derived bound constants, one row per parameter set.

    entries: iterable of (label, BoundParams) or (label, BoundParams,
    fitted_slope); the slope column is left blank when absent.
    """
    lines = ["label,split,gap,cut,margin,prefactor,rate,rate_midpoint,"
             "sample_floor,min_scale,exponent,sim_slope"]
    for entry in entries:
        label, params = entry[0], entry[1]
        slope = entry[2] if len(entry) > 2 else None
        if not isinstance(params, BoundParams):
            raise ValueError("each entry needs a BoundParams")
        c = seq_constants(params)
        cells = [str(label)] + [f"{v:.6g}" for v in
                                (params.split, params.gap, params.cut,
                                 params.margin, c.prefactor, c.rate,
                                 c.rate_midpoint, c.sample_floor, c.min_scale,
                                 c.exponent)]
        cells.append("" if slope is None else f"{slope:.6g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


_FSS_HEADER = "example,algo,distance,n,trials,errors,p_e,ln_p_e,censored,wall_ms"
_SEQ_HEADER = ("example,distance,c,alpha,trials,errors,p_e,ln_p_e,censored,"
               "mean_n,std_n,truncated,wall_ms")


def _csv_line(row) -> str:
    if isinstance(row, FssRow):
        fields = (row.example, row.algo, row.distance, row.n, row.trials,
                  row.errors, row.p_e, row.ln_p_e, row.censored, row.wall_ms)
    else:
        fields = (row.example, row.distance, row.c, row.alpha, row.trials,
                  row.errors, row.p_e, row.ln_p_e, row.censored, row.mean_n,
                  row.std_n, row.truncated, row.wall_ms)
    return ",".join(_fmt(f) for f in fields)


def _check_rows(rows) -> list:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to emit")
    kinds = {type(r) for r in rows}
    if not kinds <= {FssRow, SeqRow} or len(kinds) != 1:
        raise ValueError("rows must be all FssRow or all SeqRow")
    return rows


def rows_to_csv(rows) -> str:
    """CSV text (header plus one line per row) for a homogeneous row list."""
    rows = _check_rows(rows)
    header = _FSS_HEADER if isinstance(rows[0], FssRow) else _SEQ_HEADER
    return "\n".join([header] + [_csv_line(r) for r in rows]) + "\n"


def emit(rows, fmt: str = "csv", out_dir=".", stem: str = "results") -> list[str]:
    """Write result rows as one CSV file or as per-series plot-data files.

    Plot data is two columns (x, ln_p_e) per series, x being n (FSS) or
    the mean stopping time (SEQ); censored points are skipped there.
    Returns the written paths.
    """
    rows = _check_rows(rows)
    is_fss = isinstance(rows[0], FssRow)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out / f"{stem}.csv"
        path.write_text(rows_to_csv(rows), encoding="utf-8")
        return [str(path)]
    if fmt != "plotdata":
        raise ValueError(f"unknown format: {fmt!r}")
    series: dict[str, list[str]] = {}
    for r in rows:
        if r.censored:
            continue
        if is_fss:
            key = f"fss_{r.example}_{r.algo}_{r.distance}"
            x = r.n
        else:
            key = f"seq_{r.example}_{r.distance}_a{_fmt(r.alpha)}"
            x = r.mean_n
        series.setdefault(key, []).append(f"{_fmt(x)} {_fmt(r.ln_p_e)}")
    paths = []
    for key, lines in series.items():
        path = out / f"{key}.dat"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(str(path))
    return paths
