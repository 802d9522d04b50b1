import math
import warnings

import numpy as np
import pytest

from mvce.bench import (
    BenchRecord,
    PipelineConfig,
    _failed_record,
    _sample_size,
    default_threads,
    load_records,
    record_columns,
    run_pipeline,
    run_sweep,
    save_records,
    solve_full,
    verify_bounds,
)
from mvce.datagen import DatasetSpec, describe
from mvce.errors import (
    BoundViolation,
    ContainmentWarning,
    DimensionError,
    ThresholdUnreachable,
)
from mvce.linalg import save_matrix


def gaussian_spec(n=400, d=5, seed=0):
    return DatasetSpec(family="gaussian", n=n, d=d, seed=seed)


def make_record(**over):
    base = dict(
        dataset="gaussian n=10 d=2 seed=0", method="det", n=10, d=2, s=5,
        epsilon=0.3, delta=1e-9, seed=0, g_full=1.0, g_init=0.5,
        g_sampled=0.9, gap=0.1, bound_thm2=2.0, bound_thm3=0.8,
        max_violation=1e-12, time_lev_ms=1.0, time_sample_ms=0.1,
        time_solve_ms=2.0, time_total_ms=3.1, time_full_ms=5.0)
    base.update(over)
    return BenchRecord(**base)


def test_pipeline_config_validation():
    spec = gaussian_spec()
    with pytest.raises(DimensionError, match="exactly one"):
        PipelineConfig(method="det", epsilon=0.3)
    with pytest.raises(DimensionError, match="exactly one"):
        PipelineConfig(dataset=spec, matrix_path="x.bin", epsilon=0.3)
    with pytest.raises(DimensionError, match="unknown method"):
        PipelineConfig(dataset=spec, method="best", epsilon=0.3)
    with pytest.raises(DimensionError, match="exactly one"):
        PipelineConfig(dataset=spec, method="det")
    with pytest.raises(DimensionError, match="exactly one"):
        PipelineConfig(dataset=spec, method="det", epsilon=0.3,
                       s_fraction=0.1)
    with pytest.raises(DimensionError, match="s_fraction"):
        PipelineConfig(dataset=spec, method="uniform", epsilon=0.3)
    with pytest.raises(DimensionError, match="lev_mode"):
        PipelineConfig(dataset=spec, method="det", epsilon=0.3,
                       lev_mode="sketchy")
    with pytest.raises(DimensionError, match="det-approx"):
        PipelineConfig(dataset=spec, method="det-approx", epsilon=0.3)
    cfg = PipelineConfig(dataset=spec, method="det", epsilon=0.3)
    assert cfg.dataset_name() == describe(spec)
    cfg = PipelineConfig(matrix_path="m.bin", method="det", epsilon=0.3)
    assert cfg.dataset_name() == "m.bin"


def test_sample_size_clamps():
    cfg = PipelineConfig(dataset=gaussian_spec(), method="uniform",
                         s_fraction=0.001)
    assert _sample_size(cfg, n=400, d=5) == 5  # floor at d
    cfg = PipelineConfig(dataset=gaussian_spec(), method="uniform",
                         s_fraction=0.5)
    assert _sample_size(cfg, n=400, d=5) == 200
    cfg = PipelineConfig(dataset=gaussian_spec(), method="uniform",
                         s_fraction=1.0)
    assert _sample_size(cfg, n=400, d=5) == 400


def test_record_csv_round_trip(tmp_path):
    recs = [
        make_record(),
        make_record(method="uniform", gap=-3e-17, bound_thm3=math.inf,
                    g_sampled=1e-300),
        make_record(error="RankDeficient: boom", g_full=math.nan,
                    gap=math.nan),
    ]
    path = tmp_path / "r.csv"
    save_records(recs, path)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(record_columns())
    back = load_records(path)
    assert len(back) == 3
    for a, b in zip(recs, back):
        for name in record_columns():
            va, vb = getattr(a, name), getattr(b, name)
            if isinstance(va, float) and math.isnan(va):
                assert math.isnan(vb)
            else:
                assert va == vb, name


def test_run_pipeline_det_epsilon():
    spec = gaussian_spec()
    cfg = PipelineConfig(dataset=spec, method="det", epsilon=0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContainmentWarning)
        rec = run_pipeline(cfg)
    assert rec.method == "det" and rec.n == 400 and rec.d == 5
    assert rec.epsilon == 0.3
    assert rec.bound_thm3 == pytest.approx(
        5.0 * math.log((1.0 + 1e-9) / 0.7), rel=1e-12)
    assert rec.bound_thm2 == pytest.approx(
        5.0 * math.log(rec.s / 0.7), rel=1e-12)
    # A sampled optimum never beats the full optimum (beyond solver tol).
    assert rec.gap >= -1e-6
    assert rec.gap < rec.bound_thm3
    assert rec.initial_gap() < rec.bound_thm2
    assert rec.g_init <= rec.g_sampled + 1e-9
    assert rec.time_lev_ms > 0.0
    assert rec.time_total_ms == pytest.approx(
        rec.time_lev_ms + rec.time_sample_ms + rec.time_solve_ms, rel=1e-9)
    assert rec.error == ""


def test_run_pipeline_back_computes_epsilon():
    spec = gaussian_spec()
    cfg = PipelineConfig(dataset=spec, method="uniform", s_fraction=0.25)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContainmentWarning)
        rec = run_pipeline(cfg)
    assert rec.s == 100
    # epsilon is the exact-leverage tail mass past rank s; for a gaussian
    # matrix at s = n/4 that mass exceeds 1, so the bounds are vacuous.
    assert rec.epsilon > 1.0
    assert rec.bound_thm2 == math.inf and rec.bound_thm3 == math.inf
    assert rec.time_lev_ms == 0.0  # uniform never reads the profile


def test_run_pipeline_methods_and_reuse():
    spec = gaussian_spec(n=300, d=4)
    X = None
    full = solve_full(
        __import__("mvce.datagen", fromlist=["generate"]).generate(spec))
    for method, kwargs in (
        ("det", {"s_fraction": 0.5}),
        ("prop", {"s_fraction": 0.5}),
        ("det-approx", {"s_fraction": 0.5, "lev_mode": "approx"}),
        ("det-approx", {"epsilon": 0.4, "lev_mode": "approx"}),
    ):
        cfg = PipelineConfig(dataset=spec, method=method, **kwargs)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ContainmentWarning)
            rec = run_pipeline(cfg, X=X, full=full)
        assert rec.method == method
        assert rec.g_full == full[0]
        assert rec.time_full_ms == full[1]
        assert rec.gap < rec.bound_thm3 or math.isinf(rec.bound_thm3)


def test_run_pipeline_from_matrix_path(tmp_path):
    rng = np.random.default_rng(50)
    X = rng.standard_normal((200, 3))
    path = tmp_path / "m.bin"
    save_matrix(path, X)
    cfg = PipelineConfig(matrix_path=str(path), method="det", epsilon=0.4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContainmentWarning)
        rec = run_pipeline(cfg)
    assert rec.dataset == str(path)
    assert rec.n == 200 and rec.d == 3


def test_run_pipeline_containment_warning():
    # Sampling 5 of 400 gaussian rows cannot cover the rest, so the
    # containment check must warn and record a positive violation.
    cfg = PipelineConfig(dataset=gaussian_spec(), method="uniform",
                         s_fraction=0.0125)
    with pytest.warns(ContainmentWarning):
        rec = run_pipeline(cfg)
    assert rec.max_violation > 0.0


def test_failed_record_shape():
    cfg = PipelineConfig(dataset=gaussian_spec(), method="det", epsilon=0.3)
    rec = _failed_record(cfg, ThresholdUnreachable("nope"))
    assert rec.error == "ThresholdUnreachable: nope"
    assert rec.n == 400 and rec.d == 5 and rec.s == 0
    assert math.isnan(rec.g_full) and math.isnan(rec.gap)


def test_run_sweep_grid(tmp_path):
    datasets = [gaussian_spec(n=300, d=4),
                DatasetSpec(family="power-law-leverage", n=300, d=4, seed=1)]
    out = tmp_path / "sweep.csv"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContainmentWarning)
        recs = run_sweep(datasets, methods=("det", "uniform"),
                         s_fractions=(0.1, 0.3), seeds=(0, 1),
                         out_csv=str(out))
    assert len(recs) == 16
    # Grid order: dataset major, then method, then size, then seed.
    assert [r.dataset for r in recs] == \
        [describe(datasets[0])] * 8 + [describe(datasets[1])] * 8
    assert [r.method for r in recs[:8]] == ["det"] * 4 + ["uniform"] * 4
    assert [r.seed for r in recs[:4]] == [0, 1, 0, 1]
    # One full solve per dataset, shared.
    assert len({r.g_full for r in recs[:8]}) == 1
    back = load_records(out)
    assert len(back) == 16
    assert [r.g_sampled for r in back] == [r.g_sampled for r in recs]
    # Deterministic cells are enforced and pass; uniform cells are
    # reported for comparison only (they may and often do exceed the
    # deterministic method's bounds).
    report = verify_bounds(recs)
    assert report.count("PASS") == 8
    assert report.count("INFO") == 8
    assert "FAIL" not in report


def test_run_sweep_threaded_matches_serial():
    datasets = [gaussian_spec(n=250, d=3)]
    kw = dict(methods=("det", "prop"), s_fractions=(0.2,), seeds=(0, 1, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContainmentWarning)
        serial = run_sweep(datasets, threads=1, **kw)
        threaded = run_sweep(datasets, threads=3, **kw)
    assert len(serial) == len(threaded) == 6
    for a, b in zip(serial, threaded):
        assert (a.dataset, a.method, a.seed, a.s) == \
            (b.dataset, b.method, b.seed, b.s)
        assert a.g_sampled == b.g_sampled
        assert a.gap == b.gap


def test_run_sweep_validation():
    with pytest.raises(DimensionError, match="exactly one"):
        run_sweep([gaussian_spec()], methods=("det",),
                  s_fractions=(0.1,), epsilons=(0.3,))
    with pytest.raises(DimensionError, match="exactly one"):
        run_sweep([gaussian_spec()], methods=("det",))


def test_verify_bounds_zero_rule():
    # A gap a few ulps above zero on a vanishing bound still passes; an
    # honest violation does not.
    ok = make_record(gap=5e-10, bound_thm3=1e-10, g_init=1.0, bound_thm2=1e-10)
    report = verify_bounds([ok])
    assert report.startswith("PASS")
    neg = make_record(gap=-0.5)
    assert verify_bounds([neg]).startswith("PASS")
    bad = make_record(gap=0.9, bound_thm3=0.8)
    with pytest.raises(BoundViolation) as info:
        verify_bounds([ok, bad])
    assert info.value.records == [bad]
    assert "FAIL" in str(info.value)


def test_verify_bounds_initial_gap_and_skip():
    bad_init = make_record(g_init=-5.0, bound_thm2=1.0)
    with pytest.raises(BoundViolation):
        verify_bounds([bad_init])
    failed = make_record(error="RankDeficient: boom", gap=math.nan)
    report = verify_bounds([failed])
    assert report.startswith("SKIP")
    assert "RankDeficient" in report


def test_verify_bounds_only_enforces_deterministic_method():
    # The same out-of-bound numbers fail a det record but merely get
    # reported for a uniform one.
    for method in ("uniform", "prop", "det-approx"):
        loud = make_record(method=method, gap=0.9, bound_thm3=0.8)
        report = verify_bounds([loud])
        assert report.startswith("INFO")
    with pytest.raises(BoundViolation):
        verify_bounds([make_record(method="det", gap=0.9, bound_thm3=0.8)])


def test_default_threads(monkeypatch):
    monkeypatch.delenv("MVCE_THREADS", raising=False)
    assert default_threads() == 1
    monkeypatch.setenv("MVCE_THREADS", "4")
    assert default_threads() == 4
    monkeypatch.setenv("MVCE_THREADS", "0")
    assert default_threads() == 1
    monkeypatch.setenv("MVCE_THREADS", "many")
    assert default_threads() == 1
