"""Ensembles: uniform mixtures of independently trained estimators.

For ratio members, averaging the ratio estimates and averaging the implied
posteriors are the same operation (the prior factors out of the mean), so the
mixture is computed stably as log-mean-exp of member log densities either way.
Members may be trained with independent seeds on one dataset or on bootstrap
resamples of it ("bagged").
"""

import numpy as np

from .base import PosteriorEstimator
from .samplers import default_resolution, grid_cells, grid_masses, \
    run_chains, sample_grid_cells


def log_mean_exp(a, axis):
    a = np.asarray(a, dtype=np.float64)
    hi = np.max(a, axis=axis, keepdims=True)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.mean(np.exp(a - hi), axis=axis)) + np.squeeze(hi, axis)
    return out


class EnsembleEstimator(PosteriorEstimator):
    method = "ensemble"

    def __init__(self, members, flag="independent-seeds"):
        if len(members) < 1:
            raise ValueError("an ensemble needs at least one member")
        kinds = {m.method for m in members}
        if len(kinds) != 1:
            raise ValueError(f"mixed member methods: {sorted(kinds)}")
        benchmarks = {m.benchmark_id for m in members}
        if len(benchmarks) != 1:
            raise ValueError("members disagree on benchmark")
        if flag not in ("independent-seeds", "bagged"):
            raise ValueError(f"unknown ensemble flag {flag!r}")
        x_os = [m.x_o for m in members]
        x_o = x_os[0]
        for other in x_os[1:]:
            same = (other is None and x_o is None) or (
                other is not None and x_o is not None
                and np.array_equal(other, x_o))
            if not same:
                raise ValueError("members disagree on x_o")
        super().__init__(benchmark_id=members[0].benchmark_id,
                         prior=members[0].prior,
                         normalized=all(m.normalized for m in members),
                         x_o=x_o,
                         meta={"flag": flag, "size": len(members)})
        self.members = list(members)
        self.flag = flag

    @property
    def size(self):
        return len(self.members)

    def log_density(self, theta, x):
        theta, squeeze = self.theta2d(theta)
        stack = np.stack([np.atleast_1d(m.log_density(theta, x))
                          for m in self.members], axis=1)
        out = log_mean_exp(stack, axis=1)
        return float(out[0]) if squeeze else out

    def log_ratio(self, theta, x):
        """Mean of member ratios (ratio members only), as a log."""
        theta, squeeze = self.theta2d(theta)
        stack = np.stack([np.atleast_1d(m.log_ratio(theta, x))
                          for m in self.members], axis=1)
        out = log_mean_exp(stack, axis=1)
        return float(out[0]) if squeeze else out

    def sample(self, m, x, rng):
        self.check_x(x)
        if self.normalized:
            # exact mixture sampling: member choice, then the member's sampler
            gen = rng.gen
            counts = np.bincount(gen.integers(0, self.size, size=m),
                                 minlength=self.size)
            parts = [self.members[j].sample(int(c), x, rng.child(j))
                     for j, c in enumerate(counts) if c > 0]
            out = np.concatenate(parts, axis=0)
            perm = gen.permutation(m)
            return out[perm]
        d = self.prior.dim
        if d <= 2:
            box = self.prior.grid_box()
            centers, widths = grid_cells(box, default_resolution(d))
            masses = grid_masses(self.log_density(centers, x))
            return sample_grid_cells(masses, centers, widths, m, rng.gen)
        lows, highs = self.prior.grid_box()
        init = self.prior.sample(1, rng.child(0).gen)
        thetas, _, _, _ = run_chains(
            lambda t: self.log_density(t, x), init, keep=m,
            gen=rng.child(1).gen, burn=500, thin=1, scale=0.5,
            widths=(highs - lows) / 10.0)
        return thetas[:, 0, :]

    def coverage_logp(self, test_thetas, test_xs, m, rng):
        if self.normalized or self.prior.dim > 2:
            return generic_coverage_logp(self, test_thetas, test_xs, m, rng)
        subsets = [list(range(self.size))]
        result = ratio_group_coverage_logp(self.members, subsets, test_thetas,
                                           test_xs, m, rng)
        return result[0]

    def payload(self):
        metas, arrays = [], {}
        for j, member in enumerate(self.members):
            m_meta, m_arrays = member.payload()
            metas.append(m_meta)
            for name, arr in m_arrays.items():
                arrays[f"m{j}_{name}"] = arr
        meta = {"method": self.method, "benchmark": self.benchmark_id,
                "flag": self.flag, "members": metas, "meta": self.meta}
        return meta, arrays

    @classmethod
    def from_payload(cls, meta, arrays, benchmark):
        from .io import estimator_class
        members = []
        for j, m_meta in enumerate(meta["members"]):
            prefix = f"m{j}_"
            m_arrays = {name[len(prefix):]: arr
                        for name, arr in arrays.items()
                        if name.startswith(prefix)}
            members.append(estimator_class(m_meta["method"]).from_payload(
                m_meta, m_arrays, benchmark))
        return cls(members, flag=meta["flag"])


def generic_coverage_logp(est, test_thetas, test_xs, m, rng):
    """Default per-pair path: sample, evaluate, compare."""
    n = test_thetas.shape[0]
    log_star = np.empty(n)
    logs = np.empty((n, m))
    for i in range(n):
        x = test_xs[i]
        samples = est.sample(m, x, rng.child(i))
        logs[i] = np.atleast_1d(est.log_density(samples, x))
        log_star[i] = est.log_density(test_thetas[i], x)
    return log_star, logs


def ratio_group_coverage_logp(members, subsets, test_thetas, test_xs, m, rng):
    """Coverage log densities for several subsets of one ratio-member pool.

    Member grid evaluations are shared across subsets (the expensive part of
    evaluating many overlapping ensembles on the same test set).  Returns one
    (log_star, logs) pair per subset.  Subsets of size one reduce to the
    member's own coverage quantities.  d <= 2 only.
    """
    prior = members[0].prior
    d = prior.dim
    if d > 2:
        raise ValueError("shared-grid ensemble coverage needs d <= 2")
    box = prior.grid_box()
    centers, widths = grid_cells(box, default_resolution(d))
    n = test_thetas.shape[0]
    n_sub = len(subsets)
    log_star = [np.empty(n) for _ in range(n_sub)]
    logs = [np.empty((n, m)) for _ in range(n_sub)]
    for i in range(n):
        x = test_xs[i]
        grid_stack = np.stack([mem.log_density(centers, x)
                               for mem in members], axis=1)  # (G, n_members)
        star_stack = np.array([mem.log_density(test_thetas[i], x)
                               for mem in members])          # (n_members,)
        for s, subset in enumerate(subsets):
            sub = list(subset)
            mix_grid = log_mean_exp(grid_stack[:, sub], axis=1)
            masses = grid_masses(mix_grid)
            samples = sample_grid_cells(masses, centers, widths, m,
                                        rng.child(i, s).gen)
            sample_stack = np.stack([members[j].log_density(samples, x)
                                     for j in sub], axis=1)
            logs[s][i] = log_mean_exp(sample_stack, axis=1)
            log_star[s][i] = log_mean_exp(star_stack[sub][None, :], axis=1)[0]
    return [(log_star[s], logs[s]) for s in range(n_sub)]


def ensemble_log_posterior(ensemble, theta, x):
    """log of the mean of member densities (== prior times mean ratio)."""
    return ensemble.log_density(theta, x)
