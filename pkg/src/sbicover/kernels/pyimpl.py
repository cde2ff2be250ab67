"""Pure-Python simulator kernels.

These are the fallback implementations used when the compiled extension is
unavailable.  Both backends must consume random numbers identically so that a
given generator state produces bit-identical observables either way:

  * fixed-size draws are made by the caller and passed in as arrays;
  * variable-size draws (rejection loops, Gillespie) pull scalars one at a
    time from 4096-long blocks of gen.random(BLOCK);
  * scalar transcendentals use math.log, which (like the compiled backend's
    libc log) evaluates in C libm, so the same double goes in and out.
"""

import math

import numpy as np

BLOCK = 4096


class BlockUniforms:
    """Scalar uniforms drawn from fixed-size blocks of a Generator."""

    __slots__ = ("gen", "buf", "pos")

    def __init__(self, gen):
        self.gen = gen
        self.buf = gen.random(BLOCK)
        self.pos = 0

    def next(self):
        if self.pos == BLOCK:
            self.buf = self.gen.random(BLOCK)
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def mg1_core(u_arrival, u_service, t1, t2, rate):
    """Inter-departure times for n customers of an M/G/1 queue.

    Arrival gaps are Exponential(rate) via inversion of u_arrival; service
    times are t1 + t2 * u_service.  Departures follow
    d_i = max(a_i, d_{i-1}) + s_i.
    """
    n = u_arrival.shape[0]
    out = np.empty(n, dtype=np.float64)
    arrival = 0.0
    depart_prev = 0.0
    for i in range(n):
        arrival += -math.log(1.0 - u_arrival[i]) / rate
        service = t1 + t2 * u_service[i]
        depart = (arrival if arrival > depart_prev else depart_prev) + service
        out[i] = depart - depart_prev
        depart_prev = depart
    return out


def weinberg_core(gen, a, n):
    """n draws of c in [-1,1] from q(c) = 1 + c^2 + a*c by rejection.

    Envelope is the constant 2 + |a|, the maximum of q on [-1, 1].
    """
    envelope = 2.0 + abs(a)
    out = np.empty(n, dtype=np.float64)
    u = BlockUniforms(gen)
    k = 0
    while k < n:
        c = 2.0 * u.next() - 1.0
        if u.next() * envelope < 1.0 + c * c + a * c:
            out[k] = c
            k += 1
    return out


def lotka_core(gen, alpha, beta, gamma, x0, y0, t_end, n_rec, cap):
    """Gillespie simulation of the prey/predator jump process.

    Events: prey birth (rate alpha*X), predation (rate beta*X*Y, X-1 Y+1),
    predator death (rate gamma*Y).  Populations are clamped to cap after every
    event.  Records the pre-event state at the first record time >= current
    time; zero total rate freezes the state to the end of the horizon.
    """
    out = np.empty((2, n_rec), dtype=np.float64)
    rec_dt = t_end / n_rec
    u = BlockUniforms(gen)
    x = float(x0)
    y = float(y0)
    t = 0.0
    idx = 0
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
        t_next = t + (-math.log(1.0 - u.next()) / total)
        while idx < n_rec and (idx + 1) * rec_dt < t_next:
            out[0, idx] = x
            out[1, idx] = y
            idx += 1
        if idx == n_rec:
            break
        t = t_next
        v = u.next() * total
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
    return out


def sir_core(state0, u_infect, u_recover, p_infect, p_recover, record=False):
    """Discrete-time SIR on a grid with von Neumann neighborhoods.

    state codes: 0 susceptible, 1 infected, 2 recovered.  Per step, each
    susceptible cell with k infected neighbors becomes infected with
    probability p_infect[k] (k in 0..4); each infected cell recovers with
    probability p_recover.  Both transitions use the same-step neighbor
    counts, i.e. updates are synchronous.

    u_infect and u_recover have shape (steps, L, L).  With record=True the
    full (steps+1, L, L) trajectory is returned, else the final grid.
    """
    steps = u_infect.shape[0]
    state = state0.copy()
    traj = None
    if record:
        traj = np.empty((steps + 1,) + state.shape, dtype=np.int8)
        traj[0] = state
    for s in range(steps):
        infected = state == 1
        k = np.zeros(state.shape, dtype=np.int8)
        k[1:, :] += infected[:-1, :]
        k[:-1, :] += infected[1:, :]
        k[:, 1:] += infected[:, :-1]
        k[:, :-1] += infected[:, 1:]
        new_infected = (state == 0) & (u_infect[s] < p_infect[k])
        recovered = infected & (u_recover[s] < p_recover)
        state[new_infected] = 1
        state[recovered] = 2
        if record:
            traj[s + 1] = state
    return traj if record else state
