"""Nonparametric clustering of i.i.d. data sequences.

Sequences are compared by estimated distances between their underlying
distributions (kernel MMD or Kolmogorov-Smirnov), then clustered with
single/complete linkage or k-medoids.  A sequential driver grows all
sequences one sample at a time and stops adaptively once the clustering
is unambiguous at a shrinking threshold.  Closed-form error bounds and
Monte-Carlo experiment drivers round out the package.
"""
from .bounds import (BoundParams, BoundValue, DerivedConstants, fss_error_bound,
                     high_estimate_tail, low_estimate_tail, margin_interval,
                     seq_constants, seq_error_bound, stop_horizon,
                     stopping_tail_bound)
from .distances import (KernelSpec, KsdMatrixState, KsdPairState, MmdMatrixState,
                        MmdPairState, kernel_eval, ksd_batch, mmd_batch,
                        pairwise_matrix)
from .geometry import (Partition, SeparationReport, check_distance_matrix,
                       max_intracluster, min_intercluster, partitions_equal,
                       separation_report, split_bottleneck,
                       split_bottleneck_exact)
from .harness import (ExperimentConfig, FssRow, SeqRow, bound_table, emit,
                      estimate_separation, fit_slope, rows_to_csv, run_fss,
                      run_seq, tune_scale)
from .linkage import LinkageResult, clink, kmedoids, slink
from .sequential import SeqConfig, SeqOutcome, slink_seq, stop_threshold, \
    test_statistic
from .sources import (ArrayStream, DataSequence, ExampleSpec, GaussianSource,
                      MixtureSource, SourceStream, example, ingest_csv, sample,
                      substream)

__version__ = "0.1.0"

__all__ = [
    "ArrayStream", "BoundParams", "BoundValue", "DataSequence",
    "DerivedConstants", "ExampleSpec", "ExperimentConfig", "FssRow",
    "GaussianSource", "KernelSpec", "KsdMatrixState", "KsdPairState",
    "LinkageResult", "MixtureSource", "MmdMatrixState", "MmdPairState",
    "Partition", "SeparationReport", "SeqConfig", "SeqOutcome", "SeqRow",
    "SourceStream", "bound_table", "check_distance_matrix", "clink", "emit",
    "estimate_separation", "example", "fit_slope", "fss_error_bound",
    "high_estimate_tail", "ingest_csv", "kernel_eval", "kmedoids", "ksd_batch",
    "low_estimate_tail", "margin_interval", "max_intracluster",
    "min_intercluster", "mmd_batch", "pairwise_matrix", "partitions_equal",
    "rows_to_csv", "run_fss", "run_seq", "sample", "seq_constants",
    "seq_error_bound", "separation_report", "slink", "slink_seq",
    "split_bottleneck", "split_bottleneck_exact", "stop_horizon",
    "stop_threshold", "stopping_tail_bound", "substream", "test_statistic",
    "tune_scale",
]
