"""Simple likelihood, complex posterior: 4 Gaussian points with nonlinearly
parameterized mean and covariance.

The full parameter is a 5-vector on U(-3,3)^5; the registered benchmark
infers the marginal posterior of (theta_1, theta_2) only, redrawing the three
nuisance components from their prior for every simulation (which is what makes
the marginal likelihood intractable).
"""

import numpy as np

from ..priors import UniformBox
from .base import Benchmark

LOW, HIGH = -3.0, 3.0


def full_prior():
    return UniformBox([LOW] * 5, [HIGH] * 5)


def marginal_prior():
    return UniformBox([LOW] * 2, [HIGH] * 2)


def slcp_simulate_batch(thetas, rng):
    """Full 5-vector simulator: (n, 5) -> (n, 8)."""
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != 5:
        raise ValueError(f"thetas has shape {thetas.shape}, expected (*, 5)")
    if np.any(thetas < LOW) or np.any(thetas > HIGH):
        raise ValueError("theta outside the U(-3,3)^5 support")
    n = thetas.shape[0]
    s1 = thetas[:, 2] ** 2
    s2 = thetas[:, 3] ** 2
    rho = np.tanh(thetas[:, 4])
    z = rng.gen.standard_normal((n, 4, 2))
    # Cholesky factor of [[s1^2, rho s1 s2], [rho s1 s2, s2^2]]
    c0 = thetas[:, 0, None] + s1[:, None] * z[:, :, 0]
    c1 = thetas[:, 1, None] + s2[:, None] * (
        rho[:, None] * z[:, :, 0]
        + np.sqrt(1.0 - rho * rho)[:, None] * z[:, :, 1])
    out = np.empty((n, 8), dtype=np.float64)
    out[:, 0::2] = c0
    out[:, 1::2] = c1
    return out


def slcp_simulate(theta, rng):
    theta = np.asarray(theta, dtype=np.float64)
    return slcp_simulate_batch(theta[None, :], rng)[0]


def slcp_marginal_restrict(theta):
    """Project a full 5-vector onto the inference target (theta_1, theta_2)."""
    theta = np.asarray(theta, dtype=np.float64)
    return theta[..., :2].copy()


def _marginal_simulate_batch(thetas2, rng):
    thetas2 = np.asarray(thetas2, dtype=np.float64)
    n = thetas2.shape[0]
    gen = rng.gen
    nuisance = gen.uniform(LOW, HIGH, size=(n, 3))
    full = np.concatenate([thetas2, nuisance], axis=1)
    return slcp_simulate_batch(full, rng)


def make_benchmark():
    return Benchmark(id="slcp", prior=marginal_prior(), observable_shape=(8,),
                     simulate_batch=_marginal_simulate_batch)
