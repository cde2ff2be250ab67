"""Experiment orchestration: config, the cell matrix, plot data, CLI."""

from .config import ConfigError, ExperimentConfig, load_config  # noqa: F401
