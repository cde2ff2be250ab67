"""Approximate Bayesian computation: rejection sampling, sequential Monte
Carlo, and the weighted Gaussian KDE that wraps accepted populations.

Distances are Euclidean on the raw observable (identity summary statistic).
Both constructors take `simulator` as a callable (thetas, rng) -> (n, k),
e.g. a benchmark's simulate_batch; every call costs its row count against the
simulation budget.
"""

import numpy as np

from .base import PosteriorEstimator
from .samplers import McmcError  # noqa: F401  (re-exported for callers)

REJECT_ROUNDS = 200
PROPOSAL_CAP = 100000


def silverman_bandwidth(thetas, weights):
    """Per-dimension Silverman rule on a weighted sample."""
    d = thetas.shape[1]
    n_eff = 1.0 / float(np.sum(weights ** 2))
    mu = weights @ thetas
    var = weights @ (thetas - mu) ** 2
    factor = (4.0 / (d + 2)) ** (1.0 / (d + 4)) * n_eff ** (-1.0 / (d + 4))
    return np.maximum(factor * np.sqrt(var), 1e-9)


def kde_log_density(posterior, theta):
    """Raw weighted Gaussian-kernel density (no support masking)."""
    theta = np.asarray(theta, dtype=np.float64)
    squeeze = theta.ndim == 1
    if squeeze:
        theta = theta[None, :]
    h = posterior.bandwidth
    diff = (theta[:, None, :] - posterior.thetas[None, :, :]) / h
    comp = (-0.5 * np.sum(diff * diff, axis=2)
            - np.sum(np.log(h))
            - 0.5 * theta.shape[1] * np.log(2 * np.pi))
    stack = np.log(posterior.weights)[None, :] + comp
    hi = np.max(stack, axis=1, keepdims=True)
    out = np.log(np.sum(np.exp(stack - hi), axis=1)) + hi[:, 0]
    return float(out[0]) if squeeze else out


class AbcPosterior(PosteriorEstimator):
    """Weighted accepted sample wrapped with a Gaussian KDE."""

    method = "abc"

    def __init__(self, thetas, weights, prior, x_o, benchmark_id="",
                 bandwidth=None, distance="euclidean", meta=None):
        thetas = np.asarray(thetas, dtype=np.float64)
        if thetas.ndim != 2 or thetas.shape[0] == 0:
            raise ValueError("accepted set must be a nonempty (n, d) array")
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (thetas.shape[0],) or np.any(weights < 0):
            raise ValueError("weights must be nonnegative, one per point")
        total = weights.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        super().__init__(benchmark_id=benchmark_id, prior=prior,
                         normalized=True, x_o=x_o, meta=meta)
        self.thetas = thetas
        self.weights = weights / total
        self.distance = distance
        if bandwidth is None:
            bandwidth = silverman_bandwidth(self.thetas, self.weights)
        self.bandwidth = np.asarray(bandwidth, dtype=np.float64)

    @property
    def n_accepted(self):
        return self.thetas.shape[0]

    def log_density(self, theta, x):
        theta, squeeze = self.theta2d(theta)
        self.check_x(x)
        out = np.atleast_1d(kde_log_density(self, theta))
        log_prior = np.atleast_1d(self.prior.log_density(theta))
        out = np.where(np.isfinite(log_prior), out, -np.inf)
        return float(out[0]) if squeeze else out

    def sample(self, m, x, rng):
        self.check_x(x)
        gen = rng.gen
        d = self.thetas.shape[1]
        out = np.empty((m, d))
        filled = 0
        for _ in range(REJECT_ROUNDS):
            need = m - filled
            if need == 0:
                break
            idx = gen.choice(self.n_accepted, size=need, p=self.weights)
            draws = self.thetas[idx] + self.bandwidth * \
                gen.standard_normal((need, d))
            ok = self.prior.contains(draws)
            take = draws[ok]
            out[filled:filled + take.shape[0]] = take
            filled += take.shape[0]
        if filled < m:
            lows, highs = self.prior.grid_box()
            idx = gen.choice(self.n_accepted, size=m - filled, p=self.weights)
            draws = self.thetas[idx] + self.bandwidth * \
                gen.standard_normal((m - filled, d))
            out[filled:] = np.clip(draws, lows, highs)
        return out

    def payload(self):
        meta = {"method": self.method, "benchmark": self.benchmark_id,
                "distance": self.distance, "meta": self.meta}
        arrays = {"thetas": self.thetas, "weights": self.weights,
                  "bandwidth": self.bandwidth, "x_o": self.x_o}
        return meta, arrays

    @classmethod
    def from_payload(cls, meta, arrays, benchmark):
        return cls(thetas=arrays["thetas"], weights=arrays["weights"],
                   prior=benchmark.prior, x_o=arrays["x_o"],
                   benchmark_id=meta["benchmark"],
                   bandwidth=arrays["bandwidth"],
                   distance=meta.get("distance", "euclidean"),
                   meta=meta.get("meta", {}))


def _distances(xs, x_o):
    return np.sqrt(np.sum((xs - x_o[None, :]) ** 2, axis=1))


def rejection_abc(x_o, prior, simulator, budget, quantile, rng,
                  benchmark_id=""):
    """Keep the quantile fraction of `budget` prior simulations closest to x_o.

    The accepted count is floor(budget * quantile) + 1 (capped at budget), so
    tiny quantiles still yield a usable KDE; budget * quantile < 2 is refused.
    """
    if budget < 100:
        raise ValueError("budget must be >= 100")
    if not 0 < quantile <= 1:
        raise ValueError("quantile must be in (0, 1]")
    if budget * quantile < 2:
        raise ValueError(
            f"budget*quantile = {budget * quantile:.3g} < 2: too few accepted "
            "points for a density estimate")
    x_o = np.asarray(x_o, dtype=np.float64)
    thetas = prior.sample(budget, rng.child(0).gen)
    xs = simulator(thetas, rng.child(1))
    dist = _distances(xs, x_o)
    n_acc = min(int(budget * quantile) + 1, budget)
    idx = np.argsort(dist, kind="stable")[:n_acc]
    accepted = thetas[idx]
    weights = np.full(n_acc, 1.0 / n_acc)
    meta = {"budget": int(budget), "quantile": float(quantile),
            "epsilon": float(dist[idx[-1]]), "n_accepted": int(n_acc)}
    return AbcPosterior(accepted, weights, prior, x_o,
                        benchmark_id=benchmark_id, meta=meta)


def _weighted_quantile(values, weights, q):
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    pos = np.searchsorted(cum, q * cum[-1], side="left")
    return float(values[order[min(pos, values.size - 1)]])


def _mvn_logpdf(points, centers, cov_chol):
    """log N(points; centers, Sigma) rows-vs-rows: (m, d), (n, d) -> (m, n)."""
    d = points.shape[1]
    diff = points[:, None, :] - centers[None, :, :]
    z = np.linalg.solve(cov_chol[None, None, :, :],
                        diff[:, :, :, None])[:, :, :, 0]
    logdet = np.sum(np.log(np.diag(cov_chol)))
    return -0.5 * np.sum(z * z, axis=2) - logdet - 0.5 * d * np.log(2 * np.pi)


def smc_abc(x_o, prior, simulator, budget, population, decay, rng,
            benchmark_id=""):
    """Sequential ABC with an adaptive epsilon schedule.

    Generation 0 is a plain prior population.  Each later generation sets
    epsilon to the decay-quantile of the current weighted distances, draws
    ancestors by weight among particles within epsilon, perturbs with
    N(0, 2 * weighted covariance), rejects proposals outside the prior support
    before simulating, and accepts on distance <= epsilon with the usual
    prior/kernel importance weight.  The run consumes exactly `budget`
    simulations; the last completed generation is returned.  A generation that
    exhausts the budget with zero acceptances returns the previous one with
    meta["warn_stalled"] = True.
    """
    if population < 50:
        raise ValueError("population must be >= 50")
    if not 0 < decay < 1:
        raise ValueError("decay must be in (0, 1)")
    if budget < population:
        raise ValueError("budget smaller than one population")
    x_o = np.asarray(x_o, dtype=np.float64)
    gen_rng = rng.child(0)
    sims_left = budget
    thetas = prior.sample(population, gen_rng.child(0).gen)
    xs = simulator(thetas, gen_rng.child(1))
    dist = _distances(xs, x_o)
    weights = np.full(population, 1.0 / population)
    sims_left -= population
    epsilons = []
    generation = 0
    warn = False
    while sims_left > 0:
        generation += 1
        g_rng = rng.child(generation)
        eps = _weighted_quantile(dist, weights, decay)
        surv = dist <= eps
        sw = weights[surv] / weights[surv].sum()
        surv_thetas = thetas[surv]
        d = surv_thetas.shape[1]
        mu = sw @ surv_thetas
        centered = surv_thetas - mu
        cov = 2.0 * (centered.T * sw) @ centered
        cov += np.eye(d) * max(np.trace(cov) * 1e-9, 1e-12)
        chol = np.linalg.cholesky(cov)
        new_thetas, new_dist, new_logw = [], [], []
        accepted = 0
        propose_gen = g_rng.child(0).gen
        sim_stream = g_rng.child(1)
        sim_calls = 0
        while accepted < population and sims_left > 0:
            batch = int(min(population - accepted, sims_left, 256))
            anc = propose_gen.choice(surv_thetas.shape[0], size=batch, p=sw)
            props = np.empty((batch, d))
            pending = np.arange(batch)
            for _ in range(PROPOSAL_CAP):
                if pending.size == 0:
                    break
                noise = propose_gen.standard_normal((pending.size, d))
                cand = surv_thetas[anc[pending]] + noise @ chol.T
                ok = prior.contains(cand)
                props[pending[ok]] = cand[ok]
                pending = pending[~ok]
            if pending.size:
                raise RuntimeError("could not propose inside the prior support")
            sim_x = simulator(props, sim_stream.child(sim_calls))
            sim_calls += 1
            sims_left -= batch
            pd = _distances(sim_x, x_o)
            keep = pd <= eps
            if keep.any():
                kept = props[keep]
                log_kernel = _mvn_logpdf(kept, surv_thetas, chol)
                mix = log_kernel + np.log(sw)[None, :]
                hi = mix.max(axis=1, keepdims=True)
                log_mix = np.log(np.sum(np.exp(mix - hi), axis=1)) + hi[:, 0]
                new_logw.append(prior.log_density(kept) - log_mix)
                new_thetas.append(kept)
                new_dist.append(pd[keep])
                accepted += int(keep.sum())
        if accepted == population:
            thetas = np.concatenate(new_thetas)
            dist = np.concatenate(new_dist)
            logw = np.concatenate(new_logw)
            logw -= logw.max()
            weights = np.exp(logw)
            weights /= weights.sum()
            epsilons.append(eps)
        else:
            if accepted == 0:
                warn = True
            break
    meta = {"budget": int(budget), "population": int(population),
            "decay": float(decay), "generations": len(epsilons),
            "epsilons": epsilons, "warn_stalled": warn}
    return AbcPosterior(thetas, weights, prior, x_o,
                        benchmark_id=benchmark_id, meta=meta)
