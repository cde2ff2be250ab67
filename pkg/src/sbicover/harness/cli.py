"""Command-line entry point.

Subcommands:
  simulate  materialize a dataset container for one (benchmark, budget, seed)
  train     fit one amortized estimator cell and save it
  coverage  evaluate a saved estimator's expected coverage -> CSV rows
  run       execute the full experiment matrix from a config file
  report    emit plot-ready CSVs from merged results
  validate  run the acceptance suite and print one line per criterion

Progress goes to stderr as key=value pairs; data goes to files or stdout.
Exit codes: 0 success, 1 failed cells or criteria, 2 usage or config errors.
"""

import argparse
import os
import sys

import numpy as np

from ..container import ContainerError
from ..coverage import curve_rows, empirical_expected_coverage
from ..dataset import sample_joint, save_dataset
from ..inference import EstimatorError, load_estimator, save_estimator
from ..rng import RngStream
from ..simulators import BENCHMARK_IDS, get_benchmark
from . import cells
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .plotdata import PLOT_KINDS, PlotDataError, emit_plotdata

USAGE_EXIT = 2
FAIL_EXIT = 1


def _progress(**kv):
    print(" ".join(f"{k}={v}" for k, v in kv.items()), file=sys.stderr)


def _config_from_args(args):
    overrides = {}
    for key in ("seed", "out"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "config", None):
        return load_config(args.config, overrides)
    return parse_config("", overrides)


def _cmd_simulate(args):
    cfg = _config_from_args(args)
    benchmark = get_benchmark(args.benchmark)
    stream = RngStream(cfg.seed).child_keyed(
        f"data/{args.benchmark}/{args.budget}/{args.cell_seed}")
    ds = sample_joint(benchmark, args.budget, stream)
    out_dir = os.path.join(cfg.out, "datasets")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(
        out_dir, f"{args.benchmark}-{args.budget}-{args.cell_seed}.sbic")
    save_dataset(ds, path)
    _progress(event="simulate", benchmark=args.benchmark, budget=args.budget,
              seed=args.cell_seed, rows=len(ds), path=path)
    print(path)
    return 0


def _cmd_train(args):
    cfg = _config_from_args(args)
    if args.method not in cells.AMORTIZED_METHODS:
        print(f"error: {args.method} fits one posterior per observation; "
              "run it through the experiment matrix (`run`)", file=sys.stderr)
        return USAGE_EXIT
    counting = cells.CountingBenchmark(get_benchmark(args.benchmark))
    streams = cells._streams(cfg, args.benchmark, args.method, args.budget,
                             args.cell_seed)
    ds = sample_joint(counting, args.budget, streams["data"])
    tc = cells.train_config(cfg)
    if args.method in ("nre", "npe"):
        est = cells._train_one(args.method, ds, counting, tc,
                               streams["train"])
    else:
        from ..dataset import bootstrap_resample
        from ..inference import EnsembleEstimator
        sizes = cells._emit_sizes(cfg)
        pool = max(sizes)
        members = []
        for j in range(pool):
            ds_j = bootstrap_resample(ds, streams["data"].child(1000, j)) \
                if args.method.startswith("bagged") else ds
            members.append(cells._train_one(args.method, ds_j, counting, tc,
                                            streams["train"].child(j)))
        flag = "bagged" if args.method.startswith("bagged") \
            else "independent-seeds"
        est = EnsembleEstimator(members, flag=flag)
    out_dir = os.path.join(cfg.out, "estimators")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{args.benchmark}-{args.method}-"
                                 f"{args.budget}-{args.cell_seed}.sbic")
    save_estimator(path, est)
    _progress(event="train", benchmark=args.benchmark, method=args.method,
              budget=args.budget, seed=args.cell_seed,
              simulator_calls=counting.count, path=path)
    print(path)
    return 0


def _cmd_coverage(args):
    cfg = _config_from_args(args)
    benchmark = get_benchmark(args.benchmark)
    est = load_estimator(args.estimator, benchmark)
    stream = RngStream(cfg.seed).child_keyed(
        f"cli-cov/{args.benchmark}/{args.cell_seed}")
    test = sample_joint(benchmark, args.n_eval, stream.child(0))
    curve = empirical_expected_coverage(est, test.thetas, test.xs, args.m,
                                        stream.child(1),
                                        levels=np.asarray(cfg.levels))
    budget = int(est.meta.get("budget", 0))
    size = int(est.meta.get("size", 1))
    rows = curve_rows(curve, args.benchmark, est.method, budget,
                      args.cell_seed, ensemble_size=size)
    text = cells.format_records(rows)
    if args.out_file:
        with open(args.out_file, "w") as fh:
            fh.write(text)
        print(args.out_file)
    else:
        sys.stdout.write(text)
    _progress(event="coverage", estimator=args.estimator, n_eval=args.n_eval,
              m=args.m, rows=len(rows))
    return 0


def _cmd_run(args):
    cfg = _config_from_args(args)

    def report(status):
        _progress(event="cell", status=status["status"], key=status["key"],
                  benchmark=status["benchmark"], method=status["method"],
                  budget=status["budget"], seed=status["seed"],
                  elapsed=status.get("elapsed", ""),
                  error=status.get("error", ""))

    statuses, results_path = cells.run_matrix(cfg, jobs=args.jobs,
                                              progress=report)
    failed = [s for s in statuses if s["status"] == "fail"]
    _progress(event="matrix", cells=len(statuses), failed=len(failed),
              results=results_path)
    print(results_path)
    return FAIL_EXIT if failed else 0


def _cmd_report(args):
    with open(args.results) as fh:
        records = cells.parse_records(fh.read())
    filters = {}
    if args.benchmark:
        filters["benchmark"] = args.benchmark
    if args.method:
        filters["method"] = args.method
    if args.budget is not None:
        filters["budget"] = args.budget
    out_dir = args.out or os.path.dirname(os.path.abspath(args.results))
    path = emit_plotdata(records, args.kind, out_dir, filters)
    _progress(event="report", kind=args.kind, path=path)
    print(path)
    return 0


def _cmd_validate(args):
    from .. import acceptance
    selected = None
    if args.criteria:
        selected = [int(c) for c in args.criteria.split(",")]
    results = acceptance.run_all(selected=selected, out=print)
    return 0 if all(ok for _, ok, _ in results) else FAIL_EXIT


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sbicover",
        description="Simulation-based inference benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, default=None,
                       help="base seed (overrides config)")
        p.add_argument("--out", default=None,
                       help="output directory (overrides config)")

    p = sub.add_parser("simulate", help="materialize one dataset")
    p.add_argument("--benchmark", required=True, choices=BENCHMARK_IDS)
    p.add_argument("--budget", required=True, type=int)
    p.add_argument("--cell-seed", type=int, default=0)
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="fit one amortized estimator cell")
    p.add_argument("--benchmark", required=True, choices=BENCHMARK_IDS)
    p.add_argument("--method", required=True)
    p.add_argument("--budget", required=True, type=int)
    p.add_argument("--cell-seed", type=int, default=0)
    common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("coverage", help="expected coverage of a saved estimator")
    p.add_argument("--estimator", required=True)
    p.add_argument("--benchmark", required=True, choices=BENCHMARK_IDS)
    p.add_argument("--n-eval", type=int, default=2000)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--cell-seed", type=int, default=0)
    p.add_argument("--out-file", default=None,
                   help="write rows here instead of stdout")
    common(p)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("run", help="run the experiment matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="emit plot-ready CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--kind", required=True, choices=PLOT_KINDS)
    p.add_argument("--benchmark", default=None)
    p.add_argument("--method", default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--criteria", default=None,
                   help="comma list of criterion numbers (default: all)")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, PlotDataError, ContainerError, EstimatorError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
