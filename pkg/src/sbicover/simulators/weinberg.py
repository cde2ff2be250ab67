"""Electron-positron scattering surrogate: 20 scattering-angle cosines.

For coupling g in U(0.5, 1.5), each cosine c follows the unnormalized density
q(c) = 1 + c^2 + a(g) c on [-1, 1] with a(g) = 2 (g - 1), drawn by rejection
against the constant envelope max_c q = 2 + |a|.
"""

import numpy as np

from .. import kernels
from ..priors import UniformBox
from .base import Benchmark

N_DRAWS = 20
LOW, HIGH = 0.5, 1.5


def prior():
    return UniformBox([LOW], [HIGH])


def asymmetry(g):
    return 2.0 * (g - 1.0)


def weinberg_simulate_batch(thetas, rng):
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != 1:
        raise ValueError(f"thetas has shape {thetas.shape}, expected (*, 1)")
    if np.any(thetas < LOW) or np.any(thetas > HIGH):
        raise ValueError("g outside the U(0.5, 1.5) support")
    n = thetas.shape[0]
    out = np.empty((n, N_DRAWS), dtype=np.float64)
    gen = rng.gen
    for i in range(n):
        out[i] = kernels.weinberg_core(gen, asymmetry(thetas[i, 0]), N_DRAWS)
    return out


def weinberg_simulate(theta, rng):
    theta = np.asarray(theta, dtype=np.float64)
    return weinberg_simulate_batch(theta[None, :], rng)[0]


def make_benchmark():
    return Benchmark(id="weinberg", prior=prior(), observable_shape=(N_DRAWS,),
                     simulate_batch=weinberg_simulate_batch)
