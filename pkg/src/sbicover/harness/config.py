"""Flat key=value experiment configuration.

Every key has a typed default below; unknown keys are rejected rather than
ignored so a typo cannot silently run the wrong experiment.  Lists are
comma-separated.  Lines starting with # and blank lines are skipped.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from ..simulators import BENCHMARK_IDS

METHOD_IDS = ("nre", "npe", "ensemble-nre", "ensemble-npe", "bagged-nre",
              "rej-abc", "smc-abc", "snre")


class ConfigError(Exception):
    pass


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip() != ""]


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip() != ""]


def _str_list(text):
    return [v.strip() for v in str(text).split(",") if v.strip() != ""]


@dataclass
class ExperimentConfig:
    benchmarks: list = field(default_factory=lambda: ["gaussian", "slcp"])
    methods: list = field(default_factory=lambda: ["nre", "npe", "rej-abc"])
    budgets: list = field(default_factory=lambda: [2 ** p for p in range(7, 14)])
    seeds: int = 5
    seed: int = 0
    n_eval: int = 2000
    n_obs: int = 100
    m: int = 2000
    levels: list = field(
        default_factory=lambda: [round(l, 2) for l in np.linspace(0.05, 0.95, 19)])
    epochs: int = 100
    batch_size: int = 128
    lr: float = 1e-3
    weight_decay: float = 0.01
    val_fraction: float = 0.1
    hidden: list = field(default_factory=lambda: [128, 128, 128])
    ensemble_size: int = 5
    sweep_sizes: list = field(default_factory=list)
    abc_quantile: float = 0.05
    smc_population: int = 256
    smc_decay: float = 0.5
    snre_rounds: int = 2
    out: str = "results"

    def __post_init__(self):
        for b in self.benchmarks:
            if b not in BENCHMARK_IDS:
                raise ConfigError(f"unknown benchmark id {b!r}")
        for m in self.methods:
            if m not in METHOD_IDS:
                raise ConfigError(f"unknown method id {m!r}")
        if sorted(self.budgets) != self.budgets or len(self.budgets) == 0:
            raise ConfigError("budgets must be a nonempty ascending list")
        if any(b < 100 for b in self.budgets):
            raise ConfigError("budgets below 100 are not supported")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if self.n_eval < 1 or self.n_obs < 1 or self.m < 2:
            raise ConfigError("n_eval, n_obs must be >= 1 and m >= 2")
        if not all(0 < l < 1 for l in self.levels):
            raise ConfigError("levels must lie in (0, 1)")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size must be >= 1")
        if any(s < 1 for s in self.sweep_sizes):
            raise ConfigError("sweep sizes must be >= 1")

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


_PARSERS = {
    "benchmarks": _str_list, "methods": _str_list, "budgets": _int_list,
    "seeds": int, "seed": int, "n_eval": int, "n_obs": int, "m": int,
    "levels": _float_list, "epochs": int, "batch_size": int, "lr": float,
    "weight_decay": float, "val_fraction": float, "hidden": _int_list,
    "ensemble_size": int, "sweep_sizes": _int_list, "abc_quantile": float,
    "smc_population": int, "smc_decay": float, "snre_rounds": int,
    "out": str,
}


def parse_config(text, overrides=None):
    """Parse key=value lines into an ExperimentConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        try:
            values[key] = _PARSERS[key](val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = val
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc))


def load_config(path, overrides=None):
    with open(path, "r") as fh:
        return parse_config(fh.read(), overrides)


def config_documentation():
    """Key, default, type triplets for the README / --help text."""
    cfg = ExperimentConfig()
    lines = []
    for f in fields(ExperimentConfig):
        val = getattr(cfg, f.name)
        if isinstance(val, list):
            val = ",".join(str(v) for v in val)
        lines.append((f.name, str(val), _PARSERS[f.name].__name__.lstrip("_")))
    return lines
