"""Plot-ready CSV emission from merged result records.

Three kinds:
  coverage-curves  level on x, empirical coverage on y, one series per
                   (benchmark, method, budget, ensemble_size) plus a diagonal
                   reference series per group
  ensemble-compare ensemble curve vs mean and standard deviation across the
                   individual members, per level
  size-sweep       ensemble size on x, mean coverage per level on y

Rendering is left to any external tool; every file is tidy CSV.
"""

import os
from collections import defaultdict

import numpy as np

PLOT_KINDS = ("coverage-curves", "ensemble-compare", "size-sweep")


class PlotDataError(Exception):
    pass


def _filter(records, filters):
    filters = filters or {}
    out = []
    for r in records:
        if all(r[k] == v for k, v in filters.items() if v is not None):
            out.append(r)
    if not out:
        raise PlotDataError(f"no records match filters {filters}")
    return out


def _mean_std(values):
    arr = np.asarray(values, dtype=np.float64)
    std = arr.std(ddof=1) if arr.size > 1 else 0.0
    return float(arr.mean()), float(std)


def _fmt(v):
    return f"{v:.6f}"


def _write(path, header, rows):
    rows = sorted(rows)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    return path


def coverage_curves(records, out_dir, filters=None):
    records = _filter(records, filters)
    groups = defaultdict(list)
    for r in records:
        key = (r["benchmark"], r["method"], r["budget"], r["ensemble_size"],
               r["level"])
        groups[key].append(r["empirical"])
    rows = []
    for (bench, method, budget, size, level), vals in groups.items():
        mean, std = _mean_std(vals)
        rows.append((bench, method, budget, size, "estimator",
                     f"{level:.2f}", _fmt(mean), _fmt(std), len(vals)))
        rows.append((bench, method, budget, size, "diagonal",
                     f"{level:.2f}", _fmt(level), _fmt(0.0), len(vals)))
    header = ("benchmark", "method", "budget", "ensemble_size", "series",
              "level", "value", "spread", "n_curves")
    return _write(os.path.join(out_dir, "coverage_curves.csv"), header, rows)


def ensemble_compare(records, out_dir, filters=None):
    records = _filter(records, filters)
    ens_methods = sorted({r["method"] for r in records
                          if r["method"].startswith(("ensemble", "bagged"))})
    if not ens_methods:
        raise PlotDataError("no ensemble-family records to compare")
    rows = []
    for method in ens_methods:
        sub = [r for r in records if r["method"] == method]
        max_size = max(r["ensemble_size"] for r in sub)
        if max_size == 1:
            raise PlotDataError(f"{method}: no multi-member ensemble rows")
        groups = defaultdict(lambda: {"ens": [], "mem": []})
        for r in sub:
            key = (r["benchmark"], method, r["budget"], r["level"])
            if r["ensemble_size"] == max_size:
                groups[key]["ens"].append(r["empirical"])
            elif r["ensemble_size"] == 1:
                groups[key]["mem"].append(r["empirical"])
        for (bench, meth, budget, level), vals in groups.items():
            if not vals["ens"] or not vals["mem"]:
                continue
            ens_mean, _ = _mean_std(vals["ens"])
            mem_mean, mem_std = _mean_std(vals["mem"])
            rows.append((bench, meth, budget, f"{level:.2f}", max_size,
                         _fmt(ens_mean), _fmt(mem_mean), _fmt(mem_std),
                         len(vals["mem"])))
    if not rows:
        raise PlotDataError("ensemble records lack member rows to compare")
    header = ("benchmark", "method", "budget", "level", "ensemble_size",
              "ensemble_mean", "member_mean", "member_std", "n_members")
    return _write(os.path.join(out_dir, "ensemble_compare.csv"), header, rows)


def size_sweep(records, out_dir, filters=None):
    records = _filter(records, filters)
    groups = defaultdict(list)
    for r in records:
        if not r["method"].startswith(("ensemble", "bagged")):
            continue
        key = (r["benchmark"], r["method"], r["budget"], r["ensemble_size"],
               r["level"])
        groups[key].append(r["empirical"])
    if not groups:
        raise PlotDataError("no ensemble-family records for a size sweep")
    rows = []
    for (bench, method, budget, size, level), vals in groups.items():
        mean, std = _mean_std(vals)
        rows.append((bench, method, budget, size, f"{level:.2f}", _fmt(mean),
                     _fmt(std), len(vals)))
    header = ("benchmark", "method", "budget", "ensemble_size", "level",
              "mean_empirical", "std_empirical", "n_groups")
    return _write(os.path.join(out_dir, "size_sweep.csv"), header, rows)


def emit_plotdata(records, kind, out_dir, filters=None):
    if not records:
        raise PlotDataError("no records given")
    os.makedirs(out_dir, exist_ok=True)
    if kind == "coverage-curves":
        return coverage_curves(records, out_dir, filters)
    if kind == "ensemble-compare":
        return ensemble_compare(records, out_dir, filters)
    if kind == "size-sweep":
        return size_sweep(records, out_dir, filters)
    raise PlotDataError(f"unknown plot kind {kind!r}")
