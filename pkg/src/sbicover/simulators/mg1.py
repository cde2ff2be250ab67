"""M/G/1 queue: quantiles of inter-departure times for 50 customers.

theta = (t1, t2, rate): service times U(t1, t1 + t2), inter-arrival times
Exponential(rate).  Departures follow d_i = max(a_i, d_{i-1}) + s_i; the
observable is the {0, 0.25, 0.5, 0.75, 1} quantile vector of d_i - d_{i-1}.
"""

import numpy as np

from .. import kernels
from ..priors import UniformBox
from .base import Benchmark

N_CUSTOMERS = 50
QUANTILES = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
LOWS = np.array([0.0, 0.0, 0.0])
HIGHS = np.array([10.0, 10.0, 1.0 / 3.0])


def prior():
    return UniformBox(LOWS, HIGHS)


def mg1_simulate_batch(thetas, rng):
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != 3:
        raise ValueError(f"thetas has shape {thetas.shape}, expected (*, 3)")
    if np.any(thetas[:, 2] <= 0.0):
        raise ValueError("arrival rate theta_3 must be positive")
    n = thetas.shape[0]
    out = np.empty((n, QUANTILES.size), dtype=np.float64)
    gen = rng.gen
    for i in range(n):
        u_arrival = gen.random(N_CUSTOMERS)
        u_service = gen.random(N_CUSTOMERS)
        inter = kernels.mg1_core(u_arrival, u_service,
                                 thetas[i, 0], thetas[i, 1], thetas[i, 2])
        out[i] = np.quantile(inter, QUANTILES)
    return out


def mg1_simulate(theta, rng):
    theta = np.asarray(theta, dtype=np.float64)
    return mg1_simulate_batch(theta[None, :], rng)[0]


def make_benchmark():
    return Benchmark(id="mg1", prior=prior(),
                     observable_shape=(QUANTILES.size,),
                     simulate_batch=mg1_simulate_batch)
