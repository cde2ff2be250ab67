"""Experiment cells: one (benchmark, method, budget, seed) unit of work.

Each cell simulates its own data from streams derived purely from the cell
coordinates and the base seed, so any scheduling of cells over workers gives
identical results.  Amortized methods at the same (benchmark, budget, seed)
derive the training data from the same stream and therefore train on the
same dataset regardless of method.  A cell's output is one small CSV file
named by a hash of everything that determines its content; rerunning skips
cells whose files exist.
"""

import hashlib
import json
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..coverage import (CSV_COLUMNS, CoverageCurve, coverage_ranks,
                        curve_rows, empirical_expected_coverage,
                        nonamortized_expected_coverage, rank_contained)
from ..dataset import bootstrap_resample, sample_joint
from ..inference import (EnsembleEstimator, rejection_abc, smc_abc,
                         snre_sequential, train_npe, train_nre)
from ..inference.ensemble import ratio_group_coverage_logp
from ..nn.train import TrainConfig
from ..rng import RngStream
from ..simulators import get_benchmark
from ..simulators.base import CountingBenchmark

AMORTIZED_METHODS = ("nre", "npe", "ensemble-nre", "ensemble-npe",
                     "bagged-nre")
NONAMORTIZED_METHODS = ("rej-abc", "smc-abc", "snre")
COVERAGE_CHUNK = 250


class CellError(Exception):
    pass


def train_config(cfg):
    return TrainConfig(epochs=cfg.epochs, batch_size=cfg.batch_size,
                       lr=cfg.lr, weight_decay=cfg.weight_decay,
                       val_fraction=cfg.val_fraction, hidden=tuple(cfg.hidden))


def cell_spec(cfg, benchmark, method, budget, seed):
    """Everything that determines the cell's records, for content hashing."""
    spec = {"benchmark": benchmark, "method": method, "budget": int(budget),
            "seed": int(seed), "base_seed": int(cfg.seed),
            "m": int(cfg.m), "levels": [float(l) for l in cfg.levels]}
    if method in AMORTIZED_METHODS:
        spec["n_eval"] = int(cfg.n_eval)
    else:
        spec["n_obs"] = int(cfg.n_obs)
    if method not in ("rej-abc", "smc-abc"):
        spec["train"] = {"epochs": cfg.epochs, "batch_size": cfg.batch_size,
                         "lr": cfg.lr, "weight_decay": cfg.weight_decay,
                         "val_fraction": cfg.val_fraction,
                         "hidden": list(cfg.hidden)}
    if method.startswith(("ensemble", "bagged")):
        spec["sizes"] = _emit_sizes(cfg)
    if method == "rej-abc":
        spec["quantile"] = cfg.abc_quantile
    if method == "smc-abc":
        spec["population"] = _smc_population(cfg, budget)
        spec["decay"] = cfg.smc_decay
    if method == "snre":
        spec["rounds"] = cfg.snre_rounds
    return spec


def cell_key(spec):
    blob = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _emit_sizes(cfg):
    if cfg.sweep_sizes:
        return sorted(set(int(s) for s in cfg.sweep_sizes))
    return sorted({1, int(cfg.ensemble_size)})


def _smc_population(cfg, budget):
    return int(min(cfg.smc_population, max(50, budget // 2)))


def _streams(cfg, benchmark, method, budget, seed):
    """Named streams for one cell; training and evaluation labels disjoint."""
    root = RngStream(cfg.seed)
    labels = {
        "data": f"data/{benchmark}/{budget}/{seed}",
        "train": f"train/{method}/{benchmark}/{budget}/{seed}",
        "eval": f"eval/{benchmark}/{budget}/{seed}",
        "cov": f"cov/{method}/{benchmark}/{budget}/{seed}",
        "obs": f"obs/{method}/{benchmark}/{budget}/{seed}",
    }
    if len(set(labels.values())) != len(labels):
        raise CellError("rng stream labels collide")
    return {name: root.child_keyed(label) for name, label in labels.items()}


def _train_one(method, ds, benchmark, tc, rng):
    if "npe" in method:
        return train_npe(ds, benchmark, tc, rng)
    return train_nre(ds, benchmark, tc, rng)


def _partition(pool, size):
    return [list(range(g * size, (g + 1) * size)) for g in range(pool // size)]


def _group_curves_shared_grid(members, groups, test, m, levels, cov):
    """Coverage curves for member groups sharing grid evaluations (d <= 2).

    Pairs are processed in chunks to bound the (n, m) log-density buffers.
    """
    n = test.thetas.shape[0]
    n_groups = len(groups)
    contained = [[] for _ in range(n_groups)]
    ties_gens = [cov.child(1, s).gen for s in range(n_groups)]
    for start in range(0, n, COVERAGE_CHUNK):
        stop = min(start + COVERAGE_CHUNK, n)
        chunk = ratio_group_coverage_logp(
            members, groups, test.thetas[start:stop], test.xs[start:stop],
            m, cov.child(0, start))
        for s, (log_star, logs) in enumerate(chunk):
            ranks = coverage_ranks(log_star, logs, ties_gens[s])
            contained[s].append(rank_contained(ranks, m, levels))
    curves = []
    for s in range(n_groups):
        ind = np.concatenate(contained[s], axis=0)
        curves.append(CoverageCurve(levels=levels, coverage=ind.mean(axis=0),
                                    n_test=n, m=m))
    return curves


def _ensemble_records(cfg, counting, benchmark_id, method, budget, seed,
                      ds, test, streams, levels):
    sizes = _emit_sizes(cfg)
    pool = max(sizes)
    tc = train_config(cfg)
    bagged = method.startswith("bagged")
    members = []
    for j in range(pool):
        ds_j = bootstrap_resample(ds, streams["data"].child(1000, j)) \
            if bagged else ds
        members.append(_train_one(method, ds_j, counting, tc,
                                  streams["train"].child(j)))
    records = []
    ratio_family = all(m.method == "nre" for m in members)
    if ratio_family and counting.prior.dim <= 2:
        groups = [g for size in sizes for g in _partition(pool, size)]
        group_sizes = [size for size in sizes for _ in _partition(pool, size)]
        curves = _group_curves_shared_grid(members, groups, test, cfg.m,
                                           levels, streams["cov"])
        for size, curve in zip(group_sizes, curves):
            records += curve_rows(curve, benchmark_id, method, budget, seed,
                                  ensemble_size=size)
    else:
        flag = "bagged" if bagged else "independent-seeds"
        for size in sizes:
            for g, group in enumerate(_partition(pool, size)):
                sub = EnsembleEstimator([members[j] for j in group], flag=flag)
                curve = empirical_expected_coverage(
                    sub, test.thetas, test.xs, cfg.m,
                    streams["cov"].child(size, g), levels=levels)
                records += curve_rows(curve, benchmark_id, method, budget,
                                      seed, ensemble_size=size)
    return records


def cell_records(cfg, benchmark_id, method, budget, seed):
    """Run one cell; returns (records, simulator_calls)."""
    counting = CountingBenchmark(get_benchmark(benchmark_id))
    streams = _streams(cfg, benchmark_id, method, budget, seed)
    levels = np.asarray(cfg.levels, dtype=np.float64)
    if method in AMORTIZED_METHODS:
        ds = sample_joint(counting, budget, streams["data"])
        test = sample_joint(counting, cfg.n_eval, streams["eval"])
        if method in ("nre", "npe"):
            est = _train_one(method, ds, counting, train_config(cfg),
                             streams["train"])
            curve = empirical_expected_coverage(est, test.thetas, test.xs,
                                                cfg.m, streams["cov"],
                                                levels=levels)
            records = curve_rows(curve, benchmark_id, method, budget, seed)
        else:
            records = _ensemble_records(cfg, counting, benchmark_id, method,
                                        budget, seed, ds, test, streams,
                                        levels)
        expected = budget + cfg.n_eval
    elif method in NONAMORTIZED_METHODS:
        raw = counting.inner
        if method == "rej-abc":
            def fit(x_o, rng):
                return rejection_abc(x_o, raw.prior, counting.simulate_batch,
                                     budget, cfg.abc_quantile, rng,
                                     benchmark_id=benchmark_id)
        elif method == "smc-abc":
            population = _smc_population(cfg, budget)

            def fit(x_o, rng):
                return smc_abc(x_o, raw.prior, counting.simulate_batch,
                               budget, population, cfg.smc_decay, rng,
                               benchmark_id=benchmark_id)
        else:
            def fit(x_o, rng):
                return snre_sequential(x_o, counting, budget,
                                       cfg.snre_rounds, train_config(cfg),
                                       rng)
        curve = nonamortized_expected_coverage(fit, raw, cfg.n_obs, cfg.m,
                                               streams["obs"], levels=levels)
        records = curve_rows(curve, benchmark_id, method, budget, seed)
        expected = budget * cfg.n_obs
    else:
        raise CellError(f"unknown method {method!r}")
    if counting.count != expected:
        raise CellError(
            f"budget accounting violated in {benchmark_id}/{method}/{budget}/"
            f"{seed}: {counting.count} simulator calls, expected {expected}")
    return records, counting.count


def format_records(records, header=True):
    records = sorted(records, key=_record_order)
    lines = [",".join(CSV_COLUMNS)] if header else []
    for r in records:
        lines.append(
            f'{r["benchmark"]},{r["method"]},{r["budget"]},{r["seed"]},'
            f'{r["ensemble_size"]},{r["level"]:.2f},{r["empirical"]:.6f},'
            f'{r["ci_halfwidth"]:.6f},{r["n_eval"]}')
    return "\n".join(lines) + "\n"


def _record_order(r):
    return (r["benchmark"], r["method"], r["budget"], r["seed"],
            r["ensemble_size"], r["level"], r["empirical"])


def parse_records(text):
    rows = []
    lines = [l for l in text.splitlines() if l.strip()]
    for line in lines[1:]:
        vals = line.split(",")
        rows.append({"benchmark": vals[0], "method": vals[1],
                     "budget": int(vals[2]), "seed": int(vals[3]),
                     "ensemble_size": int(vals[4]), "level": float(vals[5]),
                     "empirical": float(vals[6]),
                     "ci_halfwidth": float(vals[7]), "n_eval": int(vals[8])})
    return rows


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def run_cell(cfg, benchmark_id, method, budget, seed, out_dir):
    """Execute one cell idempotently.  Returns a status dict."""
    spec = cell_spec(cfg, benchmark_id, method, budget, seed)
    key = cell_key(spec)
    cell_dir = os.path.join(out_dir, "cells")
    os.makedirs(cell_dir, exist_ok=True)
    path = os.path.join(cell_dir, key + ".csv")
    status = {"key": key, "benchmark": benchmark_id, "method": method,
              "budget": budget, "seed": seed, "path": path}
    if os.path.exists(path):
        status["status"] = "skip"
        return status
    start = time.monotonic()
    try:
        records, calls = cell_records(cfg, benchmark_id, method, budget, seed)
    except Exception as exc:  # per-cell failures never abort the matrix
        status["status"] = "fail"
        status["error"] = f"{type(exc).__name__}: {exc}"
        status["traceback"] = traceback.format_exc()
        return status
    _atomic_write(path, format_records(records))
    _atomic_write(os.path.join(cell_dir, key + ".json"),
                  json.dumps({"spec": spec, "simulator_calls": calls},
                             sort_keys=True, indent=1) + "\n")
    status["status"] = "done"
    status["elapsed"] = round(time.monotonic() - start, 3)
    status["simulator_calls"] = calls
    return status


def enumerate_cells(cfg):
    return [(b, m, budget, seed)
            for b in cfg.benchmarks for m in cfg.methods
            for budget in cfg.budgets for seed in range(cfg.seeds)]


def _run_cell_star(args):
    return run_cell(*args)


def run_matrix(cfg, jobs=1, progress=None):
    """Run every cell, merge results, return (statuses, results_path).

    Cell outputs are deterministic functions of the cell coordinates, so any
    jobs value yields the same merged CSV.
    """
    out_dir = cfg.out
    os.makedirs(out_dir, exist_ok=True)
    tasks = [(cfg, b, m, budget, seed, out_dir)
             for (b, m, budget, seed) in enumerate_cells(cfg)]
    statuses = []
    if jobs <= 1:
        for task in tasks:
            status = run_cell(*task)
            statuses.append(status)
            if progress:
                progress(status)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for status in pool.map(_run_cell_star, tasks):
                statuses.append(status)
                if progress:
                    progress(status)
    rows = []
    for status in statuses:
        if status["status"] in ("done", "skip") and os.path.exists(status["path"]):
            with open(status["path"]) as fh:
                rows.extend(parse_records(fh.read()))
    results_path = os.path.join(out_dir, "results.csv")
    _atomic_write(results_path, format_records(rows))
    return statuses, results_path
