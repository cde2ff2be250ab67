"""Coverage diagnostics for simulation-based posterior estimators."""

__version__ = "0.1.0"

from .rng import RngStream  # noqa: F401
