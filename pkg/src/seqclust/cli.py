"""Command-line front end.

Subcommands: distance (pairwise matrix), cluster (one-shot clustering),
fss (error probability vs sample size), seq (sequential sweep over
threshold scales), separation (long-run separation estimates), bounds
(derived bound constants).  Synthetic examples are selected with
--example 1..5; distance and cluster also accept --csv with sequences in
the documented layout.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .bounds import BoundParams
from .distances import KernelSpec, pairwise_matrix
from .harness import ExperimentConfig, bound_table, emit, estimate_separation, \
    rows_to_csv, run_fss, run_seq
from .linkage import clink, kmedoids, slink
from .sources import example, ingest_csv, substream

_DOM_CLI = 4


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_data_args(p):
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4, 5),
                   help="bundled example id")
    p.add_argument("--csv", help="CSV file with sequences")
    p.add_argument("--distance", choices=("mmd", "ksd"), default="mmd")
    p.add_argument("--bandwidth", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def _load_sequences(args, n: int):
    """(ids, list of sample arrays) from --csv or --example."""
    if (args.example is None) == (args.csv is None):
        raise ValueError("give exactly one of --example or --csv")
    if args.csv is not None:
        seqs = ingest_csv(args.csv)
        return [s.seq_id for s in seqs], [s.samples for s in seqs]
    spec = example(args.example)
    data = [src.sample(substream(args.seed, _DOM_CLI, 0, 0, s), n)
            for s, src in enumerate(spec.sources)]
    return [str(i) for i in range(len(data))], data


def _cmd_distance(args) -> int:
    ids, data = _load_sequences(args, args.n)
    dm = pairwise_matrix(data, kind=args.distance,
                         spec=KernelSpec(bandwidth=args.bandwidth))
    print("seq_id," + ",".join(ids))
    for sid, row in zip(ids, dm):
        print(sid + "," + ",".join(f"{v:.10g}" for v in row))
    return 0


def _cmd_cluster(args) -> int:
    ids, data = _load_sequences(args, args.n)
    dm = pairwise_matrix(data, kind=args.distance,
                         spec=KernelSpec(bandwidth=args.bandwidth))
    k = args.k
    if k is None:
        if args.example is None:
            raise ValueError("--k is required with --csv")
        k = example(args.example).n_clusters
    if args.algo == "kmedoids":
        part = kmedoids(dm, k, rng=substream(args.seed, _DOM_CLI, 1, 0, 0))
        gap = None
    else:
        fn = slink if args.algo == "slink" else clink
        res = fn(dm, k=k)
        part, gap = res.partition, res.final_gap
    for idx, block in enumerate(part.blocks):
        print(f"cluster {idx}: " + " ".join(ids[i] for i in block))
    if gap is not None and np.isfinite(gap):
        print(f"final_gap {gap:.10g}")
    return 0


def _emit_or_print(rows, args) -> int:
    if args.out:
        for path in emit(rows, fmt=args.format, out_dir=args.out):
            print(path)
    else:
        print(rows_to_csv(rows), end="")
    return 0


def _cmd_fss(args) -> int:
    cfg = ExperimentConfig(example=args.example, distance=args.distance,
                           bandwidth=args.bandwidth, algo=args.algo, k=args.k,
                           n_values=args.n, trials=args.trials, seed=args.seed,
                           workers=args.workers)
    return _emit_or_print(run_fss(cfg), args)


def _cmd_seq(args) -> int:
    cfg = ExperimentConfig(example=args.example, distance=args.distance,
                           bandwidth=args.bandwidth, algo="slink_seq", k=args.k,
                           c_values=args.c, alpha=args.alpha, trials=args.trials,
                           seed=args.seed, workers=args.workers)
    return _emit_or_print(run_seq(cfg), args)


def _cmd_separation(args) -> int:
    cfg = ExperimentConfig(example=args.example, distance=args.distance,
                           bandwidth=args.bandwidth, seed=args.seed)
    rep = estimate_separation(cfg, n_ref=args.n)
    print(f"max_intracluster {rep.max_intracluster:.10g}")
    print(f"min_intercluster {rep.min_intercluster:.10g}")
    print(f"split_bottleneck {rep.split_bottleneck:.10g}")
    return 0


def _cmd_bounds(args) -> int:
    spec = example(args.example)
    ref = spec.reference.get(args.distance)
    if ref is None:
        raise ValueError(f"example {spec.id} has no {args.distance} reference "
                         "separations")
    params = BoundParams(split=ref["split_bottleneck"],
                         gap=ref["min_intercluster"],
                         n_seq=spec.n_sequences, n_clusters=spec.n_clusters)
    print(bound_table([(f"example-{spec.id}-{args.distance}", params)]), end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqclust",
        description="Clustering of i.i.d. data sequences by distributional "
                    "distance.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="print the pairwise distance matrix")
    _add_data_args(p)
    p.add_argument("--n", type=int, default=1000,
                   help="samples per sequence (example mode)")
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("cluster", help="cluster once and print the blocks")
    _add_data_args(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--algo", choices=("slink", "clink", "kmedoids"),
                   default="slink")
    p.add_argument("--k", type=int)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("fss", help="fixed-sample error-probability sweep")
    _add_data_args(p)
    p.add_argument("--algo", choices=("slink", "clink", "kmedoids"),
                   default="slink")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=_int_list, required=True,
                   help="comma-separated sample sizes")
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for result files")
    p.add_argument("--format", choices=("csv", "plotdata"), default="csv")
    p.set_defaults(func=_cmd_fss)

    p = sub.add_parser("seq", help="sequential error/stopping-time sweep")
    _add_data_args(p)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=_float_list, required=True,
                   help="comma-separated threshold scales")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for result files")
    p.add_argument("--format", choices=("csv", "plotdata"), default="csv")
    p.set_defaults(func=_cmd_seq)

    p = sub.add_parser("separation", help="estimate separation statistics")
    _add_data_args(p)
    p.add_argument("--n", type=int, default=10000,
                   help="samples per sequence for the estimate")
    p.set_defaults(func=_cmd_separation)

    p = sub.add_parser("bounds", help="derived bound constants for an example")
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4, 5), required=True)
    p.add_argument("--distance", choices=("mmd", "ksd"), default="mmd")
    p.set_defaults(func=_cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
