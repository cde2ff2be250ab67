# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simulator kernels.

Mirror images of the functions in pyimpl.py.  Random consumption is
bit-identical: fixed-size draws come in as arrays, variable-size draws pull
scalars from 4096-long blocks of gen.random(), and transcendentals go through
libc (math.log on the Python side calls the same libm).
"""

from libc.math cimport log

import numpy as np

cimport numpy as cnp

cnp.import_array()

BLOCK = 4096


cdef class _Blocks:
    cdef object gen
    cdef double[::1] buf
    cdef Py_ssize_t pos

    def __init__(self, gen):
        self.gen = gen
        self.buf = gen.random(BLOCK)
        self.pos = 0

    cdef inline double next_uniform(self):
        cdef double u
        if self.pos == 4096:
            self.buf = self.gen.random(BLOCK)
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def mg1_core(double[::1] u_arrival, double[::1] u_service,
             double t1, double t2, double rate):
    cdef Py_ssize_t n = u_arrival.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double arrival = 0.0
    cdef double depart_prev = 0.0
    cdef double service, depart
    cdef Py_ssize_t i
    for i in range(n):
        arrival += -log(1.0 - u_arrival[i]) / rate
        service = t1 + t2 * u_service[i]
        depart = (arrival if arrival > depart_prev else depart_prev) + service
        out[i] = depart - depart_prev
        depart_prev = depart
    return out_arr


def weinberg_core(gen, double a, Py_ssize_t n):
    cdef double envelope = 2.0 + (a if a >= 0.0 else -a)
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef _Blocks u = _Blocks(gen)
    cdef Py_ssize_t k = 0
    cdef double c
    while k < n:
        c = 2.0 * u.next_uniform() - 1.0
        if u.next_uniform() * envelope < 1.0 + c * c + a * c:
            out[k] = c
            k += 1
    return out_arr


def lotka_core(gen, double alpha, double beta, double gamma,
               double x0, double y0, double t_end, Py_ssize_t n_rec,
               double cap):
    out_arr = np.empty((2, n_rec), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double rec_dt = t_end / n_rec
    cdef _Blocks u = _Blocks(gen)
    cdef double x = x0
    cdef double y = y0
    cdef double t = 0.0
    cdef Py_ssize_t idx = 0
    cdef double r_birth, r_pred, r_death, total, t_next, v
    while idx < n_rec:
        r_birth = alpha * x
        r_pred = beta * x * y
        r_death = gamma * y
        total = r_birth + r_pred + r_death
        if total <= 0.0:
            while idx < n_rec:
                out[0, idx] = x
                out[1, idx] = y
                idx += 1
            break
        t_next = t + (-log(1.0 - u.next_uniform()) / total)
        while idx < n_rec and (idx + 1) * rec_dt < t_next:
            out[0, idx] = x
            out[1, idx] = y
            idx += 1
        if idx == n_rec:
            break
        t = t_next
        v = u.next_uniform() * total
        if v < r_birth:
            x += 1.0
        elif v < r_birth + r_pred:
            x -= 1.0
            y += 1.0
        else:
            y -= 1.0
        if x > cap:
            x = cap
        if y > cap:
            y = cap
    return out_arr


def sir_core(cnp.int8_t[:, ::1] state0, double[:, :, ::1] u_infect,
             double[:, :, ::1] u_recover, double[::1] p_infect,
             double p_recover, bint record=False):
    cdef Py_ssize_t steps = u_infect.shape[0]
    cdef Py_ssize_t L = state0.shape[0]
    cdef Py_ssize_t M = state0.shape[1]
    state_arr = np.asarray(state0).copy()
    next_arr = np.empty_like(state_arr)
    cdef cnp.int8_t[:, ::1] state = state_arr
    cdef cnp.int8_t[:, ::1] nxt = next_arr
    traj_arr = None
    cdef cnp.int8_t[:, :, ::1] traj = None
    if record:
        traj_arr = np.empty((steps + 1, L, M), dtype=np.int8)
        traj = traj_arr
        traj[0, :, :] = state
    cdef Py_ssize_t s, i, j
    cdef int k
    cdef cnp.int8_t cell
    for s in range(steps):
        for i in range(L):
            for j in range(M):
                cell = state[i, j]
                if cell == 0:
                    k = 0
                    if i > 0 and state[i - 1, j] == 1:
                        k += 1
                    if i < L - 1 and state[i + 1, j] == 1:
                        k += 1
                    if j > 0 and state[i, j - 1] == 1:
                        k += 1
                    if j < M - 1 and state[i, j + 1] == 1:
                        k += 1
                    nxt[i, j] = 1 if u_infect[s, i, j] < p_infect[k] else 0
                elif cell == 1:
                    nxt[i, j] = 2 if u_recover[s, i, j] < p_recover else 1
                else:
                    nxt[i, j] = 2
        state_arr, next_arr = next_arr, state_arr
        state = state_arr
        nxt = next_arr
        if record:
            traj[s + 1, :, :] = state
    return traj_arr if record else state_arr
