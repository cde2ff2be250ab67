"""Joint (theta, x) datasets: sampling, splitting, resampling, serialization."""

from dataclasses import dataclass, field

import numpy as np

from .container import load_container, save_container

RETRY_ATTEMPTS = 3


class SimulationError(Exception):
    pass


@dataclass
class Dataset:
    """Paired parameter/observable draws from a benchmark's joint."""

    thetas: np.ndarray  # (n, d_theta) float64
    xs: np.ndarray      # (n, observable dim) float64
    benchmark_id: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=np.float64)
        self.xs = np.asarray(self.xs, dtype=np.float64)
        if self.thetas.ndim != 2 or self.xs.ndim != 2:
            raise ValueError("thetas and xs must be 2-d")
        if self.thetas.shape[0] != self.xs.shape[0]:
            raise ValueError("thetas and xs disagree on sample count")

    def __len__(self):
        return self.thetas.shape[0]

    def subset(self, idx):
        return Dataset(self.thetas[idx], self.xs[idx], self.benchmark_id,
                       dict(self.meta))


def sample_joint(benchmark, n, rng):
    """Draw n pairs theta ~ prior, x ~ simulator(theta).

    Rows whose observables come back non-finite are re-simulated with fresh
    noise up to RETRY_ATTEMPTS times; a row that still fails raises
    SimulationError naming the offending theta.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    d = benchmark.prior.dim
    k = int(np.prod(benchmark.observable_shape))
    if n == 0:
        return Dataset(np.empty((0, d)), np.empty((0, k)), benchmark.id,
                       _provenance(benchmark, 0, rng))
    thetas = benchmark.prior.sample(n, rng.child(0).gen)
    xs = benchmark.simulate_batch(thetas, rng.child(1))
    bad = ~np.all(np.isfinite(xs), axis=1)
    for attempt in range(RETRY_ATTEMPTS):
        if not bad.any():
            break
        xs[bad] = benchmark.simulate_batch(thetas[bad], rng.child(2, attempt))
        bad = ~np.all(np.isfinite(xs), axis=1)
    if bad.any():
        theta_bad = thetas[np.flatnonzero(bad)[0]]
        raise SimulationError(
            f"simulator {benchmark.id} failed after {RETRY_ATTEMPTS} retries "
            f"at theta={theta_bad.tolist()}")
    return Dataset(thetas, xs, benchmark.id, _provenance(benchmark, n, rng))


def _provenance(benchmark, n, rng):
    return {"benchmark": benchmark.id, "n": n, "seed": rng.seed,
            "path": list(rng.path)}


def split_dataset(ds, fractions):
    """Contiguous disjoint splits; sizes floor(f * n) in order."""
    fractions = [float(f) for f in fractions]
    if any(f <= 0 for f in fractions):
        raise ValueError("fractions must be positive")
    if sum(fractions) > 1.0 + 1e-9:
        raise ValueError(f"fractions sum to {sum(fractions)}, must be <= 1")
    n = len(ds)
    out = []
    start = 0
    for f in fractions:
        size = int(f * n + 1e-9)
        out.append(ds.subset(slice(start, start + size)))
        start += size
    return out


def bootstrap_resample(ds, rng):
    """Same-size resample with replacement."""
    n = len(ds)
    if n < 1:
        raise ValueError("cannot resample an empty dataset")
    idx = rng.gen.integers(0, n, size=n)
    return ds.subset(idx)


def save_dataset(ds, path):
    meta = dict(ds.meta)
    meta["benchmark"] = ds.benchmark_id
    save_container(path, "dataset", meta,
                   {"thetas": ds.thetas, "xs": ds.xs})


def load_dataset(path):
    _, meta, arrays = load_container(path, expect_kind="dataset")
    benchmark_id = meta.pop("benchmark")
    return Dataset(arrays["thetas"], arrays["xs"], benchmark_id, meta)
