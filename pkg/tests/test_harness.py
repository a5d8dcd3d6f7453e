import math
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from seqclust.bounds import BoundParams
from seqclust.harness import (
    ExperimentConfig,
    bound_table,
    emit,
    estimate_separation,
    fit_slope,
    rows_to_csv,
    run_fss,
    run_seq,
    tune_scale,
)


def fss_cfg(**kw):
    base = dict(example=3, algo="slink", n_values=(10,), trials=40, seed=2)
    base.update(kw)
    return ExperimentConfig(**base)


def seq_cfg(**kw):
    base = dict(example=3, algo="slink_seq", c_values=(1.5,), trials=30, seed=2)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_normalizes_values():
    cfg = fss_cfg(n_values=[5, 10], algo="slink_fss")
    assert cfg.n_values == (5, 10)
    assert cfg.algo == "slink"
    assert ExperimentConfig(example=1, algo="kmedoids_fss").algo == "kmedoids"
    assert ExperimentConfig(example=1, algo="slink_seq").algo == "slink_seq"


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(example=9)
    with pytest.raises(ValueError):
        ExperimentConfig(example=1, distance="emd")
    with pytest.raises(ValueError):
        ExperimentConfig(example=1, algo="dbscan")
    with pytest.raises(ValueError):
        ExperimentConfig(example=1, bandwidth=0.0)
    with pytest.raises(ValueError):
        ExperimentConfig(example=1, trials=-1)


def test_run_fss_basic_row():
    rows = run_fss(fss_cfg())
    assert len(rows) == 1
    r = rows[0]
    assert (r.example, r.algo, r.distance, r.n, r.trials) == ("3", "slink", "mmd", 10, 40)
    assert 0 <= r.errors <= 40
    assert r.p_e == r.errors / 40
    if r.errors:
        assert_allclose(r.ln_p_e, math.log(r.p_e), rtol=1e-12)
        assert not r.censored
    else:
        assert r.ln_p_e is None
        assert r.censored


def test_run_fss_censoring_at_tiny_error():
    # overwhelming sample size: zero errors and a censored row
    rows = run_fss(fss_cfg(n_values=(400,), trials=10))
    assert rows[0].errors == 0
    assert rows[0].censored
    assert rows[0].ln_p_e is None


def test_run_fss_error_rate_decreases_with_n():
    rows = run_fss(fss_cfg(n_values=(4, 40), trials=60))
    assert rows[0].p_e > rows[1].p_e


def test_run_fss_needs_example():
    with pytest.raises(ValueError):
        run_fss(fss_cfg(example=None, csv="whatever.csv"))


def test_run_fss_rejects_seq_algo():
    with pytest.raises(ValueError):
        run_fss(fss_cfg(algo="slink_seq"))
    with pytest.raises(ValueError):
        run_seq(seq_cfg(algo="slink"))


def test_workers_do_not_change_counts():
    a = run_fss(fss_cfg(trials=24, workers=1))
    b = run_fss(fss_cfg(trials=24, workers=2))
    ra, rb = a[0], b[0]
    assert (ra.errors, ra.trials, ra.p_e, ra.ln_p_e) == (rb.errors, rb.trials, rb.p_e, rb.ln_p_e)
    # whole rows match except for wall time
    assert rows_to_csv(a).splitlines()[0] == rows_to_csv(b).splitlines()[0]
    la = rows_to_csv(a).splitlines()[1].rsplit(",", 1)[0]
    lb = rows_to_csv(b).splitlines()[1].rsplit(",", 1)[0]
    assert la == lb


def test_run_seq_row_fields():
    rows = run_seq(seq_cfg())
    r = rows[0]
    assert (r.example, r.distance, r.c, r.alpha) == ("3", "mmd", 1.5, 0.5)
    assert r.trials == 30
    assert r.mean_n >= 3
    assert r.std_n >= 0
    assert r.truncated == 0


def test_run_seq_mean_grows_with_scale():
    rows = run_seq(seq_cfg(c_values=(1.0, 2.5)))
    assert rows[0].mean_n < rows[1].mean_n


def test_run_seq_deterministic_per_seed():
    a = run_seq(seq_cfg())
    b = run_seq(seq_cfg())
    assert (a[0].errors, a[0].mean_n, a[0].std_n) == (b[0].errors, b[0].mean_n, b[0].std_n)
    c = run_seq(seq_cfg(seed=3))
    assert (a[0].errors, a[0].mean_n) != (c[0].errors, c[0].mean_n)


def test_estimate_separation_toy():
    cfg = ExperimentConfig(example=3, seed=4)
    rep = estimate_separation(cfg, n_ref=800)
    # identical sources within a cluster, unit mean steps across: small
    # intra values, cross distance near its long-run level (the min over
    # noisy pair estimates sits a little low at this length)
    assert rep.max_intracluster < 0.12
    assert rep.min_intercluster == pytest.approx(0.41289, abs=0.07)
    assert rep.split_bottleneck <= rep.max_intracluster


def test_tune_scale_hits_target():
    cfg = seq_cfg(trials=0)
    c = tune_scale(cfg, 20.0, tol=0.05, trials=80)
    rows = run_seq(seq_cfg(c_values=(c,), trials=200))
    assert abs(rows[0].mean_n - 20.0) < 3.0


def test_tune_scale_rejects_tiny_target():
    with pytest.raises(ValueError):
        tune_scale(seq_cfg(), 3.0)


def test_fit_slope_on_line():
    xs = [1.0, 2.0, 3.0, 4.0]
    ys = [0.5 - 2.0 * x for x in xs]
    assert_allclose(fit_slope(xs, ys), -2.0, rtol=1e-12)


def test_rows_to_csv_layout():
    rows = run_fss(fss_cfg())
    text = rows_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "example,algo,distance,n,trials,errors,p_e,ln_p_e,censored,wall_ms"
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "3"
    assert fields[8] in ("true", "false")


def test_rows_to_csv_rejects_mixed_kinds():
    fss = run_fss(fss_cfg())
    seq = run_seq(seq_cfg())
    with pytest.raises(ValueError):
        rows_to_csv(fss + seq)
    with pytest.raises(ValueError):
        rows_to_csv([])


def test_emit_csv_and_plotdata(tmp_path):
    rows = run_fss(fss_cfg(n_values=(5, 9)))
    paths = emit(rows, fmt="csv", out_dir=tmp_path, stem="try")
    assert [os.path.basename(p) for p in paths] == ["try.csv"]
    text = open(paths[0]).read()
    assert text.startswith("example,algo")
    assert len(text.splitlines()) == 3

    paths = emit(rows, fmt="plotdata", out_dir=tmp_path, stem="try")
    assert [os.path.basename(p) for p in paths] == ["fss_3_slink_mmd.dat"]
    body = open(paths[0]).read().splitlines()
    # x column is n, y is ln p_e, censored points are dropped
    assert all(len(line.split()) == 2 for line in body if not line.startswith("#"))


def test_emit_rejects_unknown_format(tmp_path):
    rows = run_fss(fss_cfg())
    with pytest.raises(ValueError):
        emit(rows, fmt="png", out_dir=tmp_path)


def test_bound_table_output():
    entries = [
        ("a", BoundParams(split=0.06238, gap=0.11152, n_seq=12, n_clusters=2)),
        ("b", BoundParams(split=0.0, gap=0.41289, n_seq=25, n_clusters=5), -0.09084),
    ]
    text = bound_table(entries)
    lines = text.splitlines()
    assert lines[0].startswith("label,split,gap,cut,margin,")
    assert lines[0].endswith("sim_slope")
    assert len(lines) == 3
    a = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert a["label"] == "a"
    assert float(a["rate_midpoint"]) == pytest.approx(0.3773e-4, rel=5e-4)
    assert a["sim_slope"] == ""
    b = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert float(b["rate_midpoint"]) == pytest.approx(0.2664e-2, rel=5e-4)
    assert float(b["sim_slope"]) == pytest.approx(-0.09084)
