"""Timing comparison of the compiled and pure-Python simulator kernels.

Both backends are imported directly and driven with identical random draws,
so the script also double-checks bit-for-bit agreement before timing.

    python3 benchmarks/bench_kernels.py [--scale 1.0]
"""

import argparse
import time

import numpy as np

from sbicover.kernels import pyimpl
from sbicover.simulators.lotka import CAP, N_REC, T_END, X0, Y0
from sbicover.simulators.mg1 import N_CUSTOMERS
from sbicover.simulators.sir import DT, L, STEPS, infection_table

try:
    from sbicover.kernels import _ckernels
except ImportError:
    _ckernels = None


def _mg1_case(impl, seed, reps):
    gen = np.random.default_rng(seed)
    out = None
    for _ in range(reps):
        u_a = gen.random(N_CUSTOMERS)
        u_s = gen.random(N_CUSTOMERS)
        out = impl.mg1_core(u_a, u_s, 1.0, 4.0, 0.2)
    return np.asarray(out)


def _weinberg_case(impl, seed, reps):
    gen = np.random.default_rng(seed)
    out = None
    for _ in range(reps):
        out = impl.weinberg_core(gen, 0.6, 2000)
    return np.asarray(out)


def _lotka_case(impl, seed, reps):
    gen = np.random.default_rng(seed)
    out = None
    for _ in range(reps):
        out = impl.lotka_core(gen, 0.5, 0.02, 0.3, X0, Y0, T_END, N_REC, CAP)
    return np.asarray(out)


def _sir_case(impl, seed, reps):
    gen = np.random.default_rng(seed)
    p_infect = infection_table(0.4)
    out = None
    for _ in range(reps):
        state0 = np.zeros((L, L), dtype=np.int8)
        idx = gen.choice(L * L, size=3, replace=False)
        state0.ravel()[idx] = 1
        u_i = gen.random((STEPS, L, L))
        u_r = gen.random((STEPS, L, L))
        out = impl.sir_core(state0, u_i, u_r, p_infect, 0.3 * DT)
    return np.asarray(out)


CASES = [
    ("mg1 (50-customer queue)", _mg1_case, 2000),
    ("weinberg (2000 rejection draws)", _weinberg_case, 50),
    ("lotka (Gillespie, 30 time units)", _lotka_case, 30),
    ("sir (50x50 grid, 100 steps)", _sir_case, 30),
]


def _time(func, impl, seed, reps):
    start = time.perf_counter()
    out = func(impl, seed, reps)
    return (time.perf_counter() - start) / reps, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=float, default=1.0,
                        help="multiply per-case repetition counts")
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled backend not built; timing the pure-Python fallback only")
    header = f"{'kernel':36s} {'python':>12s} {'compiled':>12s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, func, base_reps in CASES:
        reps = max(1, int(base_reps * args.scale))
        py_t, py_out = _time(func, pyimpl, 123, reps)
        if _ckernels is None:
            print(f"{name:36s} {py_t * 1e3:10.3f}ms {'-':>12s} {'-':>8s}")
            continue
        c_t, c_out = _time(func, _ckernels, 123, reps)
        if not np.array_equal(py_out, c_out):
            raise SystemExit(f"{name}: backends disagree bit-for-bit")
        print(f"{name:36s} {py_t * 1e3:10.3f}ms {c_t * 1e3:10.3f}ms "
              f"{py_t / c_t:7.1f}x")
    if _ckernels is not None:
        print("outputs agree bit-for-bit across backends")


if __name__ == "__main__":
    main()
