"""Command line interface.

Subcommands: gen, lev, sample, solve, pipeline, sweep, verify-bounds.
Exit codes: 0 success, 1 usage error, 2 data/computation error,
3 bound violation.
"""

import argparse
import configparser
import csv
import sys

from . import __version__
from .bench import (PipelineConfig, load_records, run_pipeline, run_sweep,
                    save_records, verify_bounds)
from .datagen import FAMILIES, DatasetSpec, describe, generate
from .errors import BoundViolation, MvceError
from .leverage import approx_leverage, exact_leverage, profile_to_csv
from .linalg import load_matrix, save_matrix
from .sampling import (sample_deterministic, sample_deterministic_approx,
                       sample_proportional, sample_uniform, selection_to_csv)
from .solver import (init_khachiyan, init_kumar_yildirim, solve_fixed_point,
                     solve_wolfe_atwood)

USAGE_EXIT = 1
DATA_EXIT = 2
BOUND_EXIT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _parse_params(pairs):
    params = {}
    for pair in pairs or []:
        key, sep, val = pair.partition("=")
        if not sep or not key:
            raise MvceError(f"--param expects key=value, got {pair!r}")
        params[key] = val
    return params


def _add_dataset_flags(p):
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="family parameter, repeatable")


def _cmd_gen(args):
    spec = DatasetSpec(family=args.family, n=args.n, d=args.d,
                       seed=args.seed, params=_parse_params(args.param))
    X = generate(spec)
    save_matrix(args.out, X)
    print(f"wrote {describe(spec)} to {args.out}")
    return 0


def _cmd_lev(args):
    X = load_matrix(args.input)
    if args.mode == "exact":
        profile = exact_leverage(X)
    else:
        profile = approx_leverage(X, args.alpha, seed=args.seed)
    profile_to_csv(profile, args.out)
    print(f"wrote {profile.mode} profile of {X.shape[0]} rows to {args.out}")
    return 0


def _cmd_sample(args):
    X = load_matrix(args.input)
    n, d = X.shape
    if args.method in ("uniform", "prop") and args.s_frac is None:
        raise MvceError(f"method {args.method} requires --s-frac")
    if args.method in ("det", "det-approx") and args.epsilon is None:
        raise MvceError(f"method {args.method} requires --epsilon")
    if args.method == "uniform":
        sel = sample_uniform(n, max(d, int(round(args.s_frac * n))),
                             args.seed)
    elif args.method == "prop":
        profile = exact_leverage(X)
        sel = sample_proportional(
            profile, max(d, int(round(args.s_frac * n))), args.seed)
    elif args.method == "det":
        sel = sample_deterministic(exact_leverage(X), args.epsilon)
    else:
        profile = approx_leverage(X, args.alpha, seed=args.seed)
        sel = sample_deterministic_approx(profile, args.epsilon)
    selection_to_csv(sel, args.out)
    print(f"selected {sel.s} of {n} rows ({sel.method}) into {args.out}")
    return 0


def _write_report(path, items):
    with open(path, "w") as fh:
        for key, val in items:
            fh.write(f"{key}={val}\n")


def _cmd_solve(args):
    X = load_matrix(args.input)
    u0 = init_kumar_yildirim(X) if args.init == "ky" \
        else init_khachiyan(X.shape[0])
    solver = solve_wolfe_atwood if args.algo == "wa" else solve_fixed_point
    state, cert = solver(X, u0=u0, delta=args.delta)
    items = [
        ("n", X.shape[0]), ("d", X.shape[1]),
        ("g", f"{state.g:.17g}"), ("delta", f"{cert.delta:.17g}"),
        ("kind", cert.kind), ("iterations", cert.iterations),
        ("runtime_ms", f"{cert.runtime_ms:.3f}"),
        ("gap_bound", f"{cert.gap_bound:.17g}"),
        ("support_size", state.support.size),
    ]
    for key, val in items:
        print(f"{key}={val}")
    if args.report:
        _write_report(args.report, items)
    if args.design_out:
        with open(args.design_out, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["index", "weight"])
            for i in state.support:
                out.writerow([int(i), f"{state.u[i]:.17g}"])
    return 0


def _cmd_pipeline(args):
    if args.input is not None:
        cfg_source = {"matrix_path": args.input}
    else:
        for flag in ("family", "n", "d"):
            if getattr(args, flag) is None:
                raise MvceError(
                    "pipeline needs either --in or --family/--n/--d")
        spec = DatasetSpec(family=args.family, n=args.n, d=args.d,
                           seed=args.dataset_seed,
                           params=_parse_params(args.param))
        cfg_source = {"dataset": spec}
    cfg = PipelineConfig(
        method=args.method, epsilon=args.epsilon, s_fraction=args.s_frac,
        delta=args.delta, lev_mode=args.lev_mode, alpha=args.alpha,
        seed=args.seed, **cfg_source)
    rec = run_pipeline(cfg)
    print(f"dataset={rec.dataset}")
    print(f"method={rec.method} s={rec.s} epsilon={rec.epsilon:.6g} "
          f"delta={rec.delta:g}")
    print(f"g_full={rec.g_full:.12g} g_sampled={rec.g_sampled:.12g} "
          f"gap={rec.gap:.6e}")
    print(f"bound_thm2={rec.bound_thm2:.6e} bound_thm3={rec.bound_thm3:.6e} "
          f"max_violation={rec.max_violation:.6e}")
    print(f"time_lev_ms={rec.time_lev_ms:.3f} "
          f"time_sample_ms={rec.time_sample_ms:.3f} "
          f"time_solve_ms={rec.time_solve_ms:.3f} "
          f"time_full_ms={rec.time_full_ms:.3f}")
    if args.out_csv:
        save_records([rec], args.out_csv)
    return 0


def _split_list(raw):
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def _cmd_sweep(args):
    ini = configparser.ConfigParser()
    read = ini.read(args.config)
    if not read:
        raise MvceError(f"cannot read sweep config {args.config!r}")
    datasets = []
    for section in ini.sections():
        if not section.startswith("dataset"):
            continue
        sec = ini[section]
        params = {k: v for k, v in sec.items()
                  if k not in ("family", "n", "d", "seed")}
        datasets.append(DatasetSpec(
            family=sec.get("family"), n=sec.getint("n"), d=sec.getint("d"),
            seed=sec.getint("seed", 0), params=params))
    if not datasets:
        raise MvceError(f"{args.config}: no [dataset*] sections")
    if "sweep" not in ini:
        raise MvceError(f"{args.config}: missing [sweep] section")
    sw = ini["sweep"]
    methods = _split_list(sw.get("methods", "det"))
    kw = {}
    if sw.get("s_fractions", None):
        kw["s_fractions"] = [float(v) for v in
                             _split_list(sw.get("s_fractions"))]
    if sw.get("epsilons", None):
        kw["epsilons"] = [float(v) for v in _split_list(sw.get("epsilons"))]
    seeds = [int(v) for v in _split_list(sw.get("seeds", "0"))]
    records = run_sweep(
        datasets, methods, seeds=seeds, delta=sw.getfloat("delta", 1e-9),
        lev_mode=sw.get("lev_mode", "exact"),
        alpha=sw.getfloat("alpha", 0.25), out_csv=args.out_csv,
        threads=args.threads, **kw)
    failed = sum(1 for r in records if r.error)
    print(f"{len(records)} cells ({failed} failed) -> {args.out_csv}")
    return 0


def _cmd_verify_bounds(args):
    records = load_records(args.csv)
    report = verify_bounds(records)
    print(report)
    print(f"no bound violations in {len(records)} records")
    return 0


def build_parser():
    parser = _Parser(prog="mvce",
                     description="Minimum-volume covering ellipsoids via "
                                 "leverage-score sampling")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    _add_dataset_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("lev", help="leverage profile of a matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=("exact", "approx"), default="exact")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_lev)

    p = sub.add_parser("sample", help="select rows of a matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", required=True,
                   choices=("det", "det-approx", "uniform", "prop"))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--s-frac", type=float)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("solve", help="solve the dual on a matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--delta", type=float, default=1e-9)
    p.add_argument("--init", choices=("ky", "khachiyan"), default="ky")
    p.add_argument("--algo", choices=("wa", "fp"), default="wa")
    p.add_argument("--report")
    p.add_argument("--design-out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("pipeline",
                       help="leverage -> sample -> solve -> certify")
    p.add_argument("--in", dest="input")
    p.add_argument("--family", choices=sorted(FAMILIES))
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--dataset-seed", type=int, default=0)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--method", default="det",
                   choices=("det", "det-approx", "uniform", "prop"))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--s-frac", type=float)
    p.add_argument("--delta", type=float, default=1e-9)
    p.add_argument("--lev-mode", choices=("exact", "approx"),
                   default="exact")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("sweep", help="run a benchmark grid from a config")
    p.add_argument("--config", required=True,
                   help="INI file with [dataset*] sections and a [sweep] "
                        "section")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--threads", type=int, default=None,
                   help="parallel cells (default: MVCE_THREADS env var)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify-bounds",
                       help="check a sweep CSV against the proven bounds")
    p.add_argument("--csv", required=True)
    p.set_defaults(func=_cmd_verify_bounds)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return BOUND_EXIT
    except MvceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
