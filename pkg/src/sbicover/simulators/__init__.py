"""Benchmark registry and the individual generative models."""

from . import gaussian, lotka, mg1, sir, slcp, weinberg
from .base import Benchmark, CountingBenchmark

_FACTORIES = {
    "slcp": slcp.make_benchmark,
    "weinberg": weinberg.make_benchmark,
    "mg1": mg1.make_benchmark,
    "lotka": lotka.make_benchmark,
    "sir": sir.make_benchmark,
    "gaussian": gaussian.make_benchmark,
}

BENCHMARK_IDS = tuple(sorted(_FACTORIES))


def get_benchmark(benchmark_id):
    """Construct the benchmark registered under this id."""
    try:
        factory = _FACTORIES[benchmark_id]
    except KeyError:
        raise KeyError(f"unknown benchmark {benchmark_id!r}; "
                       f"registered: {', '.join(BENCHMARK_IDS)}") from None
    return factory()


__all__ = ["Benchmark", "CountingBenchmark", "BENCHMARK_IDS", "get_benchmark",
           "gaussian", "lotka", "mg1", "sir", "slcp", "weinberg"]
