"""Tractable validation benchmark: theta ~ N(0,1), x = 4 iid draws N(theta,1).

The conjugate posterior N(sum(x)/(d+1), 1/(d+1)) is exposed through the
estimator contract, so the coverage diagnostic can be checked against an
oracle whose coverage is nominal by construction.  `std_scale` deliberately
mis-calibrates the oracle (0.5 overconfident, 2.0 conservative) for
direction tests of the diagnostic.
"""

import numpy as np

from ..inference.base import PosteriorEstimator
from ..priors import IndependentNormal
from .base import Benchmark

D_OBS = 4


def prior():
    return IndependentNormal([0.0], [1.0])


def gaussian_simulate_batch(thetas, rng):
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != 1:
        raise ValueError(f"thetas has shape {thetas.shape}, expected (*, 1)")
    return thetas + rng.gen.standard_normal((thetas.shape[0], D_OBS))


def gaussian_simulate(theta, rng):
    theta = np.asarray(theta, dtype=np.float64)
    return gaussian_simulate_batch(theta[None, :], rng)[0]


class GaussianPosteriorOracle(PosteriorEstimator):
    """Exact conjugate posterior N(sum(x)/(d+1), std_scale^2/(d+1))."""

    method = "gaussian-oracle"

    def __init__(self, std_scale=1.0):
        super().__init__(benchmark_id="gaussian", prior=prior(),
                         normalized=True)
        self.std_scale = float(std_scale)
        self.std = self.std_scale / np.sqrt(D_OBS + 1.0)

    def _mean(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (D_OBS,):
            raise ValueError(f"x has shape {x.shape}, expected ({D_OBS},)")
        return float(np.sum(x)) / (D_OBS + 1.0)

    def log_density(self, theta, x):
        theta, squeeze = self.theta2d(theta)
        mu = self._mean(x)
        z = (theta[:, 0] - mu) / self.std
        out = -0.5 * z * z - np.log(self.std) - 0.5 * np.log(2 * np.pi)
        return float(out[0]) if squeeze else out

    def sample(self, m, x, rng):
        mu = self._mean(x)
        return mu + self.std * rng.gen.standard_normal((m, 1))


def gaussian_true_posterior(x=None, std_scale=1.0):
    """The amortized conjugate-posterior oracle (x, when given, is validated)."""
    oracle = GaussianPosteriorOracle(std_scale=std_scale)
    if x is not None:
        oracle._mean(x)  # shape check only; the oracle amortizes over x
    return oracle


def make_benchmark():
    return Benchmark(id="gaussian", prior=prior(), observable_shape=(D_OBS,),
                     simulate_batch=gaussian_simulate_batch,
                     analytic_posterior=gaussian_true_posterior())


def analytic_log_ratio(thetas, xs):
    """log p(x|theta)/p(x) = log posterior(theta|x) - log prior(theta).

    Vectorized over matched rows: thetas (n, 1), xs (n, D_OBS).
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    mu = np.sum(xs, axis=1) / (D_OBS + 1.0)
    std = 1.0 / np.sqrt(D_OBS + 1.0)
    z = (thetas[:, 0] - mu) / std
    log_post = -0.5 * z * z - np.log(std) - 0.5 * np.log(2 * np.pi)
    log_prior = -0.5 * thetas[:, 0] ** 2 - 0.5 * np.log(2 * np.pi)
    return log_post - log_prior
