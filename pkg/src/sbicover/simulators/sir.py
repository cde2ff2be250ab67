"""Susceptible-infected-recovered dynamics on a 50x50 grid.

theta = (infection rate beta, recovery rate gamma) ~ U(0,1)^2.  Three distinct
cells start infected; 100 synchronous steps of size dt = 0.1 follow, where a
susceptible cell with k infected von Neumann neighbors becomes infected with
probability 1 - (1 - beta dt)^k and an infected cell recovers with probability
gamma dt.  The observable is the final grid (S/I/R as 0/1/2) flattened;
estimators consume it one-hot expanded to 3 channels.
"""

import numpy as np

from .. import kernels
from ..priors import UniformBox
from .base import Benchmark

L = 50
STEPS = 100
DT = 0.1
N_INIT = 3


def prior():
    return UniformBox([0.0, 0.0], [1.0, 1.0])


def _initial_state(gen):
    state = np.zeros((L, L), dtype=np.int8)
    cells = gen.choice(L * L, size=N_INIT, replace=False)
    state.flat[cells] = 1
    return state


def infection_table(beta):
    # P(infected | k infected neighbors), k = 0..4
    return 1.0 - (1.0 - beta * DT) ** np.arange(5, dtype=np.float64)


def spatial_sir_simulate_batch(thetas, rng):
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != 2:
        raise ValueError(f"thetas has shape {thetas.shape}, expected (*, 2)")
    if np.any(thetas < 0.0) or np.any(thetas > 1.0):
        raise ValueError("theta outside the U(0,1)^2 support")
    n = thetas.shape[0]
    out = np.empty((n, L * L), dtype=np.float64)
    gen = rng.gen
    for i in range(n):
        final = _run(thetas[i], gen, record=False)
        out[i] = final.ravel().astype(np.float64)
    return out


def _run(theta, gen, record):
    state0 = _initial_state(gen)
    u_infect = gen.random((STEPS, L, L))
    u_recover = gen.random((STEPS, L, L))
    return kernels.sir_core(state0, u_infect, u_recover,
                            infection_table(theta[0]), theta[1] * DT,
                            record)


def spatial_sir_simulate(theta, rng):
    theta = np.asarray(theta, dtype=np.float64)
    return spatial_sir_simulate_batch(theta[None, :], rng)[0]


def spatial_sir_trajectory(theta, rng):
    """All intermediate grids, shape (STEPS+1, L, L) int8.  For diagnostics."""
    theta = np.asarray(theta, dtype=np.float64)
    return np.asarray(_run(theta, rng.gen, record=True))


def one_hot_encode(xs):
    """(n, L*L) categorical 0/1/2 -> (n, 3*L*L) one-hot reals."""
    xs = np.asarray(xs)
    codes = np.rint(xs).astype(np.int64)
    n, k = codes.shape
    out = np.zeros((n, 3 * k), dtype=np.float64)
    rows = np.repeat(np.arange(n), k)
    cols = np.tile(np.arange(k), n) * 3 + codes.ravel()
    out[rows, cols] = 1.0
    return out


def make_benchmark():
    return Benchmark(id="sir", prior=prior(), observable_shape=(L * L,),
                     simulate_batch=spatial_sir_simulate_batch,
                     encode=one_hot_encode, feature_dim=3 * L * L)
