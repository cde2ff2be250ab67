"""Neural ratio estimation: a binary classifier between joint and marginal
pairs whose logit estimates the log likelihood-to-evidence ratio.

Training labels pairs (theta_i, x_i) 1 and (theta_sigma(i), x_i) 0, where
sigma is a fresh within-batch shuffle each epoch, so class 0 follows the
product of marginals while reusing the simulated x.  The posterior density is
prior * exp(logit), unnormalized.
"""

import numpy as np

from ..nn.net import init_mlp, mlp_forward
from ..nn.train import Standardizer, bce_loss_grad, fit_network, \
    split_train_val
from .base import PosteriorEstimator
from .samplers import default_resolution, grid_cells, grid_masses, \
    run_chains, sample_grid_cells


class RatioEstimator(PosteriorEstimator):
    method = "nre"

    def __init__(self, weights, normalizer, prior, benchmark_id, encode=None,
                 x_o=None, meta=None):
        super().__init__(benchmark_id=benchmark_id, prior=prior,
                         normalized=False, x_o=x_o, meta=meta)
        self.weights = weights
        self.normalizer = normalizer
        self._encode = encode

    def encode_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self._encode is None:
            return x
        return self._encode(x[None, :])[0]

    def _logits(self, thetas, feats):
        """thetas (B, d), feats (B, f) matched rows -> logits (B,)."""
        raw = np.concatenate([thetas, feats], axis=1)
        return mlp_forward(self.weights, self.normalizer.apply(raw))[:, 0]

    def log_ratio(self, theta, x):
        """log r_hat(x | theta) for one x and a batch of thetas."""
        theta, squeeze = self.theta2d(theta)
        x = self.check_x(x)
        fx = self.encode_x(x)
        fx = np.broadcast_to(fx, (theta.shape[0], fx.shape[0]))
        out = self._logits(theta, fx)
        return float(out[0]) if squeeze else out

    def log_ratio_pairs(self, thetas, xs):
        """Matched rows: thetas (B, d) with xs (B, k) -> (B,) logits."""
        thetas = np.asarray(thetas, dtype=np.float64)
        xs = np.asarray(xs, dtype=np.float64)
        feats = xs if self._encode is None else self._encode(xs)
        return self._logits(thetas, feats)

    def log_density(self, theta, x):
        """log prior + logit; -inf outside the prior support."""
        theta, squeeze = self.theta2d(theta)
        log_prior = np.atleast_1d(self.prior.log_density(theta))
        out = np.full(theta.shape[0], -np.inf)
        inside = np.isfinite(log_prior)
        if inside.any():
            ratios = self.log_ratio(theta[inside], x)
            out[inside] = log_prior[inside] + np.atleast_1d(ratios)
        return float(out[0]) if squeeze else out

    def sample(self, m, x, rng):
        x = self.check_x(x)
        d = self.prior.dim
        if d <= 2:
            box = self.prior.grid_box()
            centers, widths = grid_cells(box, default_resolution(d))
            masses = grid_masses(self.log_density(centers, x))
            return sample_grid_cells(masses, centers, widths, m, rng.gen)
        return self._mh_sample(m, x, rng)

    def _mh_sample(self, m, x, rng, burn=500, thin=1):
        lows, highs = self.prior.grid_box()
        init = self.prior.sample(1, rng.child(0).gen)
        thetas, _, _, _ = run_chains(
            lambda t: self.log_density(t, x), init, keep=m,
            gen=rng.child(1).gen, burn=burn, thin=thin, scale=0.5,
            widths=(highs - lows) / 10.0)
        return thetas[:, 0, :]

    def coverage_logp(self, test_thetas, test_xs, m, rng):
        """Per test pair: log density at theta* and at m self-samples.

        Returns (log_star (n,), logs (n, m)).  Low-dimensional targets go
        through the grid sampler; higher ones run one lockstep MH chain per
        pair.
        """
        n = test_thetas.shape[0]
        d = self.prior.dim
        log_star = np.empty(n)
        logs = np.empty((n, m))
        if d <= 2:
            box = self.prior.grid_box()
            centers, widths = grid_cells(box, default_resolution(d))
            for i in range(n):
                x = test_xs[i]
                masses = grid_masses(self.log_density(centers, x))
                samples = sample_grid_cells(masses, centers, widths, m,
                                            rng.child(i, 0).gen)
                logs[i] = self.log_density(samples, x)
                log_star[i] = self.log_density(test_thetas[i], x)
            return log_star, logs
        # one chain per pair, lockstep across pairs
        lows, highs = self.prior.grid_box()
        feats = np.stack([self.encode_x(x) for x in test_xs])

        def logd(thetas):
            log_prior = self.prior.log_density(thetas)
            out = np.full(n, -np.inf)
            inside = np.isfinite(log_prior)
            if inside.any():
                out[inside] = log_prior[inside] + self._logits(
                    thetas[inside], feats[inside])
            return out

        inits = self.prior.sample(n, rng.child(0).gen)
        _, logps, _, _ = run_chains(
            logd, inits, keep=m, gen=rng.child(1).gen, burn=400, thin=1,
            scale=0.5, widths=(highs - lows) / 10.0, collect_thetas=False)
        logs[:] = logps.T
        for i in range(n):
            log_star[i] = self.log_density(test_thetas[i], test_xs[i])
        return log_star, logs

    def payload(self):
        meta = {"method": self.method, "benchmark": self.benchmark_id,
                "meta": self.meta}
        arrays = _weights_to_arrays(self.weights)
        arrays["norm_mean"] = self.normalizer.mean
        arrays["norm_std"] = self.normalizer.std
        if self.x_o is not None:
            arrays["x_o"] = self.x_o
        return meta, arrays

    @classmethod
    def from_payload(cls, meta, arrays, benchmark):
        weights = _weights_from_arrays(arrays)
        norm = Standardizer(mean=arrays["norm_mean"], std=arrays["norm_std"])
        return cls(weights=weights, normalizer=norm, prior=benchmark.prior,
                   benchmark_id=meta["benchmark"], encode=benchmark.encode,
                   x_o=arrays.get("x_o"), meta=meta.get("meta", {}))


def _weights_to_arrays(weights):
    out = {"n_layers": np.array([len(weights)], dtype=np.int64)}
    for i, (w, b) in enumerate(weights):
        out[f"w{i}"] = w
        out[f"b{i}"] = b
    return out


def _weights_from_arrays(arrays):
    n = int(arrays["n_layers"][0])
    return [(arrays[f"w{i}"], arrays[f"b{i}"]) for i in range(n)]


def nre_log_posterior(estimator, theta, x):
    """log p(theta) + logit(d_hat(theta, x)); -inf outside prior support."""
    return estimator.log_density(theta, x)


def train_nre(dataset, benchmark, cfg, rng):
    """Fit a ratio estimator on a joint dataset.

    The marginal class reuses each batch's observables against the batch's
    thetas rolled by one position (a cheap derangement), resampled every
    epoch.
    """
    n = len(dataset)
    if n < 64:
        raise ValueError(f"need at least 64 training pairs, got {n}")
    thetas = dataset.thetas
    feats = benchmark.encode(dataset.xs)
    joint = np.concatenate([thetas, feats], axis=1)
    n_train, _ = split_train_val(n, cfg.val_fraction)
    norm = Standardizer.fit(joint[:n_train])
    t_train, f_train = thetas[:n_train], feats[:n_train]
    t_val, f_val = thetas[n_train:], feats[n_train:]
    val_x = norm.apply(np.concatenate([
        np.concatenate([t_val, f_val], axis=1),
        np.concatenate([np.roll(t_val, 1, axis=0), f_val], axis=1)]))
    val_y = np.concatenate([np.ones(len(t_val)), np.zeros(len(t_val))])
    gen = rng.gen
    weights = init_mlp([joint.shape[1], *cfg.hidden, 1], gen)

    def make_batch(idx):
        if idx.size > 1:
            marg_idx = np.roll(idx, 1)
        else:
            marg_idx = (idx + 1) % n_train
        x = norm.apply(np.concatenate([
            np.concatenate([t_train[idx], f_train[idx]], axis=1),
            np.concatenate([t_train[marg_idx], f_train[idx]], axis=1)]))
        y = np.concatenate([np.ones(idx.size), np.zeros(idx.size)])
        return x, y

    def val_loss(ws):
        return bce_loss_grad(mlp_forward(ws, val_x), val_y)[0]

    weights, history = fit_network(weights, cfg, gen, n_train, make_batch,
                                   bce_loss_grad, val_loss)
    meta = {"budget": n, "best_epoch": history["best_epoch"],
            "val_loss": history["val"][history["best_epoch"]]}
    return RatioEstimator(weights=weights, normalizer=norm,
                          prior=benchmark.prior, benchmark_id=benchmark.id,
                          encode=benchmark.encode, meta=meta)
