"""Benchmark bundle: prior + simulator + metadata, and call counting."""

import numpy as np


class Benchmark:
    """A named generative model.

    simulate_batch(thetas, rng) maps (n, d_theta) parameters to (n, k)
    observables, consuming rng.gen sequentially row by row (deterministic
    given the stream).  `prior` is the prior of the INFERENCE TARGET; any
    nuisance parameters are drawn internally per simulation.  `encode` maps
    raw observables to the real-valued features estimators consume (identity
    for all benchmarks except the categorical-grid one).
    """

    def __init__(self, id, prior, observable_shape, simulate_batch,
                 analytic_posterior=None, encode=None, feature_dim=None):
        self.id = id
        self.prior = prior
        self.d_theta = prior.dim
        self.observable_shape = tuple(observable_shape)
        self._simulate_batch = simulate_batch
        self.analytic_posterior = analytic_posterior
        self._encode = encode
        k = int(np.prod(self.observable_shape))
        self.feature_dim = k if feature_dim is None else int(feature_dim)

    def simulate_batch(self, thetas, rng):
        thetas = np.asarray(thetas, dtype=np.float64)
        if thetas.ndim != 2 or thetas.shape[1] != self.d_theta:
            raise ValueError(
                f"thetas has shape {thetas.shape}, expected (*, {self.d_theta})")
        xs = self._simulate_batch(thetas, rng)
        k = int(np.prod(self.observable_shape))
        if xs.shape != (thetas.shape[0], k):
            raise RuntimeError(
                f"simulator {self.id} returned shape {xs.shape}, "
                f"expected ({thetas.shape[0]}, {k})")
        return xs

    def simulate(self, theta, rng):
        theta = np.asarray(theta, dtype=np.float64)
        return self.simulate_batch(theta[None, :], rng)[0]

    def encode(self, xs):
        """Map raw observables (n, k) to estimator features (n, feature_dim)."""
        if self._encode is None:
            return np.asarray(xs, dtype=np.float64)
        return self._encode(np.asarray(xs, dtype=np.float64))


class CountingBenchmark:
    """Wrapper that counts simulator calls (one per row) for budget audits."""

    def __init__(self, benchmark):
        self.inner = benchmark
        self.count = 0

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def simulate_batch(self, thetas, rng):
        xs = self.inner.simulate_batch(thetas, rng)
        self.count += xs.shape[0]
        return xs

    def simulate(self, theta, rng):
        theta = np.asarray(theta, dtype=np.float64)
        return self.simulate_batch(theta[None, :], rng)[0]
