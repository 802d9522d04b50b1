"""End-to-end pipeline (leverage -> sample -> solve -> certify) and the
benchmark sweep/verification harness built on it.

A pipeline run records everything needed to audit the theory afterward:
both dual objectives, the realized gap, the proven gap bounds evaluated
for the run's parameters, stage timings, and the worst containment
violation of the recovered ellipsoid over the full row set.  Sweeps fan
a grid of cells out over these runs, reuse one full-data solve per
dataset, and append rows to CSV as they finish so a crash keeps partial
results.
"""

import csv
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .datagen import DatasetSpec, describe, generate
from .errors import (BoundViolation, ContainmentWarning, DimensionError,
                     MvceError)
from .leverage import approx_leverage, exact_leverage
from .linalg import load_matrix
from .sampling import (SampleSelection, sample_deterministic,
                       sample_deterministic_approx, sample_proportional,
                       sample_uniform)
from .solver import (bound_final_gap, bound_initial_gap, dual_objective,
                     init_khachiyan, init_kumar_yildirim, solve_wolfe_atwood)

_METHODS = ("det", "det-approx", "uniform", "prop")

# |gap| below this (relative to max(1, |g_full|)) is treated as zero by
# verify_bounds: measured gaps can land a few ulps on either side of 0.
_GAP_ZERO_RTOL = 1e-9


@dataclass
class PipelineConfig:
    """One pipeline cell: where the data comes from and how to sample it.

    Exactly one of epsilon (tail-mass target, deterministic rules only)
    and s_fraction (sample size as a fraction of n, any method) must be
    set.  seed drives the randomized samplers and the sketch; dataset
    generation uses the seed inside the DatasetSpec.
    """

    dataset: DatasetSpec = None
    matrix_path: str = None
    method: str = "det"
    epsilon: float = None
    s_fraction: float = None
    delta: float = 1e-9
    lev_mode: str = "exact"
    alpha: float = 0.25
    seed: int = 0
    max_iter: int = 1000000

    def __post_init__(self):
        if (self.dataset is None) == (self.matrix_path is None):
            raise DimensionError(
                "set exactly one of dataset and matrix_path")
        if self.method not in _METHODS:
            raise DimensionError(
                f"unknown method {self.method!r}; known: {_METHODS}")
        if (self.epsilon is None) == (self.s_fraction is None):
            raise DimensionError(
                "set exactly one of epsilon and s_fraction")
        if self.method in ("uniform", "prop") and self.s_fraction is None:
            raise DimensionError(
                f"method {self.method!r} needs s_fraction, not epsilon")
        if self.lev_mode not in ("exact", "approx"):
            raise DimensionError(f"unknown lev_mode {self.lev_mode!r}")
        if self.method == "det-approx" and self.lev_mode != "approx":
            raise DimensionError("method det-approx requires lev_mode approx")

    def dataset_name(self):
        return describe(self.dataset) if self.dataset is not None \
            else self.matrix_path


@dataclass
class BenchRecord:
    """One row of a benchmark CSV; numeric fields are nan on failure."""

    dataset: str
    method: str
    n: int
    d: int
    s: int
    epsilon: float
    delta: float
    seed: int
    g_full: float
    g_init: float
    g_sampled: float
    gap: float
    bound_thm2: float
    bound_thm3: float
    max_violation: float
    time_lev_ms: float
    time_sample_ms: float
    time_solve_ms: float
    time_total_ms: float
    time_full_ms: float
    error: str = ""

    def initial_gap(self):
        return self.g_full - self.g_init


_INT_FIELDS = {"n", "d", "s", "seed"}
_STR_FIELDS = {"dataset", "method", "error"}


def record_columns():
    return [f.name for f in fields(BenchRecord)]


def save_records(records, path):
    """Write records as CSV with a header row."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(record_columns())
        for rec in records:
            out.writerow(_record_row(rec))


def _record_row(rec):
    row = []
    for f in fields(BenchRecord):
        v = getattr(rec, f.name)
        if f.name in _STR_FIELDS:
            row.append(v)
        elif f.name in _INT_FIELDS:
            row.append(int(v))
        else:
            row.append(f"{float(v):.17g}")
    return row


def load_records(path):
    """Read a CSV written by save_records back into BenchRecords."""
    out = []
    with open(path, "r", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            kwargs = {}
            for f in fields(BenchRecord):
                raw = row[f.name]
                if f.name in _STR_FIELDS:
                    kwargs[f.name] = raw
                elif f.name in _INT_FIELDS:
                    kwargs[f.name] = int(raw)
                else:
                    kwargs[f.name] = float(raw)
            out.append(BenchRecord(**kwargs))
    return out


def _resolve_matrix(cfg):
    if cfg.dataset is not None:
        return generate(cfg.dataset)
    return load_matrix(cfg.matrix_path)


def _sample_size(cfg, n, d):
    s = int(round(cfg.s_fraction * n))
    return min(max(s, d), n)


def _select(cfg, X, exact_profile):
    """The selection stage.  Returns (selection, profile_time_ms,
    sample_time_ms); profile_time is 0 when the exact profile passed in
    (timed by the caller) is the one used."""
    n, d = X.shape
    t_lev = 0.0
    profile = exact_profile
    if cfg.lev_mode == "approx":
        t0 = time.perf_counter()
        profile = approx_leverage(X, cfg.alpha, seed=cfg.seed)
        t_lev = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    if cfg.method == "det":
        if cfg.epsilon is not None:
            sel = sample_deterministic(profile, cfg.epsilon)
        else:
            s = _sample_size(cfg, n, d)
            idx = profile.order[:s]
            sel = SampleSelection(
                indices=idx, n=n, method="det", alpha=profile.alpha,
                scores_used=profile.scores[idx])
    elif cfg.method == "det-approx":
        if cfg.epsilon is not None:
            sel = sample_deterministic_approx(profile, cfg.epsilon)
        else:
            s = _sample_size(cfg, n, d)
            idx = profile.order[:s]
            sel = SampleSelection(
                indices=idx, n=n, method="det-approx", alpha=profile.alpha,
                scores_used=profile.scores[idx])
    elif cfg.method == "uniform":
        sel = sample_uniform(n, _sample_size(cfg, n, d), cfg.seed)
    else:
        sel = sample_proportional(profile, _sample_size(cfg, n, d), cfg.seed)
    t_sample = (time.perf_counter() - t0) * 1e3
    return sel, t_lev, t_sample


def solve_full(X, delta=1e-9, max_iter=1000000):
    """Solve the full-data dual; returns (g_full, time_ms)."""
    t0 = time.perf_counter()
    state, _ = solve_wolfe_atwood(
        X, u0=init_kumar_yildirim(X), delta=delta, max_iter=max_iter)
    return state.g, (time.perf_counter() - t0) * 1e3


def run_pipeline(cfg, X=None, full=None):
    """Run one pipeline cell and return its BenchRecord.

    Parameters
    ----------
    cfg : PipelineConfig
    X : ndarray, optional
        Pre-generated matrix for cfg (skips generation).
    full : (g_full, time_ms), optional
        Pre-computed full-data solve for X (skips recomputing it).

    Notes
    -----
    Emits ContainmentWarning when some original row lies outside the
    ellipsoid of the sampled solution by more than delta + 1e-9 in
    relative squared radius; the magnitude is recorded either way.
    """
    if X is None:
        X = _resolve_matrix(cfg)
    n, d = X.shape

    t0 = time.perf_counter()
    exact_profile = exact_leverage(X)
    t_exact_lev = (time.perf_counter() - t0) * 1e3

    sel, t_approx_lev, t_sample = _select(cfg, X, exact_profile)
    # Uniform sampling never looks at a profile, so its leverage stage
    # costs nothing even though the exact profile is computed above for
    # bound bookkeeping.
    if cfg.method == "uniform":
        t_lev = 0.0
    elif cfg.lev_mode == "approx":
        t_lev = t_approx_lev
    else:
        t_lev = t_exact_lev

    if cfg.epsilon is not None:
        epsilon = float(cfg.epsilon)
    else:
        sorted_scores = exact_profile.sorted_scores()
        epsilon = max(float(np.sum(sorted_scores[sel.s:])), 1e-15)

    Xs = sel.apply(X)
    t0 = time.perf_counter()
    state, cert = solve_wolfe_atwood(
        Xs, u0=init_kumar_yildirim(Xs), delta=cfg.delta,
        max_iter=cfg.max_iter)
    t_solve = (time.perf_counter() - t0) * 1e3

    g_sampled = state.g
    g_init = dual_objective(Xs, init_khachiyan(sel.s).weights)

    if full is None:
        full = solve_full(X, delta=cfg.delta, max_iter=cfg.max_iter)
    g_full, time_full_ms = full

    # Containment of every original row in the sampled solution's
    # ellipsoid {x : x^T M(u)^-1 x <= d}.
    T = X @ state.Minv
    max_violation = float(np.max(np.einsum("ij,ij->i", T, X))) / d - 1.0
    if max_violation > cfg.delta + 1e-9:
        warnings.warn(
            f"{max_violation:.3e} relative containment violation on "
            f"unsampled rows (delta={cfg.delta:g})", ContainmentWarning)

    return BenchRecord(
        dataset=cfg.dataset_name(), method=cfg.method, n=n, d=d, s=sel.s,
        epsilon=epsilon, delta=cfg.delta, seed=cfg.seed, g_full=g_full,
        g_init=g_init, g_sampled=g_sampled, gap=g_full - g_sampled,
        bound_thm2=bound_initial_gap(d, sel.s, epsilon)
        if epsilon < 1.0 else math.inf,
        bound_thm3=bound_final_gap(d, epsilon, cfg.delta),
        max_violation=max_violation, time_lev_ms=t_lev,
        time_sample_ms=t_sample, time_solve_ms=t_solve,
        time_total_ms=t_lev + t_sample + t_solve,
        time_full_ms=time_full_ms, error="")


def _failed_record(cfg, exc):
    nan = math.nan
    ds = cfg.dataset
    return BenchRecord(
        dataset=cfg.dataset_name(), method=cfg.method,
        n=ds.n if ds is not None else 0, d=ds.d if ds is not None else 0,
        s=0, epsilon=nan if cfg.epsilon is None else cfg.epsilon,
        delta=cfg.delta, seed=cfg.seed, g_full=nan, g_init=nan,
        g_sampled=nan, gap=nan, bound_thm2=nan, bound_thm3=nan,
        max_violation=nan, time_lev_ms=nan, time_sample_ms=nan,
        time_solve_ms=nan, time_total_ms=nan, time_full_ms=nan,
        error=f"{type(exc).__name__}: {exc}")


def default_threads():
    """Worker count for sweep cells, capped by the MVCE_THREADS env var
    (default 1, which keeps runs fully serial)."""
    try:
        return max(1, int(os.environ.get("MVCE_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(datasets, methods, s_fractions=None, epsilons=None, seeds=(0,),
              delta=1e-9, lev_mode="exact", alpha=0.25, out_csv=None,
              threads=None, max_iter=1000000):
    """Run the full grid datasets x methods x sizes x seeds.

    Parameters
    ----------
    datasets : iterable of DatasetSpec
    methods : iterable of method names
    s_fractions, epsilons : exactly one must be given; the grid's size
        axis.
    seeds : iterable of ints, sampling seeds.
    out_csv : str, optional
        Append rows here as cells finish (header first), so partial
        results survive a crash.
    threads : int, optional
        Concurrent cells; defaults to the MVCE_THREADS env var.

    Returns
    -------
    list of BenchRecord in deterministic grid order.  Failed cells get a
    record with the error column set; the sweep keeps going.
    """
    if (s_fractions is None) == (epsilons is None):
        raise DimensionError("set exactly one of s_fractions and epsilons")
    sizes = [("s_fraction", float(v)) for v in s_fractions] \
        if s_fractions is not None else [("epsilon", float(v))
                                         for v in epsilons]
    datasets = list(datasets)
    if threads is None:
        threads = default_threads()

    # One full solve per dataset, shared by every cell on that dataset.
    cache = {}
    for spec in datasets:
        name = describe(spec)
        if name not in cache:
            X = generate(spec)
            cache[name] = (X, solve_full(X, delta=delta, max_iter=max_iter))

    cells = []
    for spec in datasets:
        for method in methods:
            for key, val in sizes:
                for seed in seeds:
                    kw = {key: val}
                    cells.append(PipelineConfig(
                        dataset=spec, method=method, delta=delta,
                        lev_mode=lev_mode, alpha=alpha, seed=int(seed),
                        max_iter=max_iter, **kw))

    def run_cell(cfg):
        X, full = cache[describe(cfg.dataset)]
        try:
            return run_pipeline(cfg, X=X, full=full)
        except MvceError as exc:
            return _failed_record(cfg, exc)

    writer = None
    fh = None
    if out_csv is not None:
        fh = open(out_csv, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(record_columns())
        fh.flush()
    records = []
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = pool.map(run_cell, cells)
                for rec in results:
                    records.append(rec)
                    if writer is not None:
                        writer.writerow(_record_row(rec))
                        fh.flush()
        else:
            for cfg in cells:
                rec = run_cell(cfg)
                records.append(rec)
                if writer is not None:
                    writer.writerow(_record_row(rec))
                    fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return records


def verify_bounds(records):
    """Check records against the bounds their method actually proves.

    Selection by exact descending leverage (method "det") carries an
    unconditional guarantee, so for those records the realized gap
    g_full - g_sampled must fall below bound_thm3 and the initial gap
    g_full - g_init below bound_thm2; a miss is a FAIL.  Approximate
    scores only satisfy the tail guarantee with high probability over
    the sketch seed, and uniform or proportional selections carry no
    per-record bound at all (the reported bounds are the deterministic
    method's entitlement at the same s, kept for comparison), so those
    records are printed as INFO and never fail.  Gaps within
    1e-9 * max(1, |g_full|) of zero count as zero.  Records with a
    nonempty error column are skipped (reported as SKIP).

    Returns the report table as a string; raises BoundViolation carrying
    the offending records if any enforced check fails.
    """
    lines = []
    bad = []
    for rec in records:
        if rec.error:
            lines.append(f"SKIP {rec.dataset} method={rec.method} "
                         f"seed={rec.seed}: {rec.error}")
            continue
        zero = _GAP_ZERO_RTOL * max(1.0, abs(rec.g_full))
        gap = 0.0 if abs(rec.gap) <= zero else rec.gap
        igap = rec.initial_gap()
        igap = 0.0 if abs(igap) <= zero else igap
        enforced = rec.method == "det"
        ok_final = gap < rec.bound_thm3
        ok_init = igap < rec.bound_thm2
        if not enforced:
            status = "INFO"
        elif ok_final and ok_init:
            status = "PASS"
        else:
            status = "FAIL"
        lines.append(
            f"{status} {rec.dataset} method={rec.method} s={rec.s} "
            f"seed={rec.seed} gap={rec.gap:.6e} bound={rec.bound_thm3:.6e} "
            f"init_gap={rec.initial_gap():.6e} "
            f"init_bound={rec.bound_thm2:.6e}")
        if enforced and not (ok_final and ok_init):
            bad.append(rec)
    report = "\n".join(lines)
    if bad:
        raise BoundViolation(
            f"{len(bad)} of {len(records)} records violate their bounds:\n"
            + report, records=bad)
    return report
