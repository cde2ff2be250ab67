"""Lotka-Volterra predator-prey dynamics as a Markov jump process.

Events and rates for populations (X prey, Y predators):
    prey birth      alpha * X        X += 1
    predation       beta  * X * Y    X -= 1, Y += 1
    predator death  gamma * Y        Y -= 1
simulated exactly by the Gillespie algorithm from (X0, Y0) = (50, 100) over
T = 30 time units, populations clamped to 3000 after every event.  The
observable stacks prey then predator counts at the 50 record times
t_k = (k+1) T/50 (the state at t=0 is the fixed initial condition and is not
recorded).  The full parameter is (alpha, beta, gamma, delta) on the
log-uniform box [1e-2, 1]^4; delta plays no role in the dynamics (predation
converts prey directly).  The registered benchmark infers the predator
parameters (beta, gamma), redrawing (alpha, delta) from the prior per
simulation.
"""

import numpy as np

from .. import kernels
from ..priors import LogUniformBox
from .base import Benchmark

X0, Y0 = 50.0, 100.0
T_END = 30.0
N_REC = 50
CAP = 3000.0
RATE_LOW, RATE_HIGH = 1e-2, 1.0


def full_prior():
    return LogUniformBox([RATE_LOW] * 4, [RATE_HIGH] * 4)


def marginal_prior():
    return LogUniformBox([RATE_LOW] * 2, [RATE_HIGH] * 2)


def lotka_volterra_simulate_batch(thetas, rng):
    """Full 4-vector simulator: (n, 4) -> (n, 100)."""
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != 4:
        raise ValueError(f"thetas has shape {thetas.shape}, expected (*, 4)")
    if np.any(thetas < RATE_LOW) or np.any(thetas > RATE_HIGH):
        raise ValueError("theta outside the log-uniform [1e-2, 1]^4 support")
    n = thetas.shape[0]
    out = np.empty((n, 2 * N_REC), dtype=np.float64)
    gen = rng.gen
    for i in range(n):
        series = kernels.lotka_core(gen, thetas[i, 0], thetas[i, 1],
                                    thetas[i, 2], X0, Y0, T_END, N_REC, CAP)
        out[i] = np.asarray(series).ravel()
    return out


def lotka_volterra_simulate(theta, rng):
    theta = np.asarray(theta, dtype=np.float64)
    return lotka_volterra_simulate_batch(theta[None, :], rng)[0]


def _marginal_simulate_batch(thetas2, rng):
    thetas2 = np.asarray(thetas2, dtype=np.float64)
    n = thetas2.shape[0]
    gen = rng.gen
    log_lo, log_hi = np.log(RATE_LOW), np.log(RATE_HIGH)
    nuisance = np.exp(gen.uniform(log_lo, log_hi, size=(n, 2)))
    full = np.empty((n, 4), dtype=np.float64)
    full[:, 0] = nuisance[:, 0]   # alpha
    full[:, 1] = thetas2[:, 0]    # beta
    full[:, 2] = thetas2[:, 1]    # gamma
    full[:, 3] = nuisance[:, 1]   # delta (inert)
    return lotka_volterra_simulate_batch(full, rng)


def make_benchmark():
    return Benchmark(id="lotka", prior=marginal_prior(),
                     observable_shape=(2 * N_REC,),
                     simulate_batch=_marginal_simulate_batch)
