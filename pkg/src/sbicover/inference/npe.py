"""Neural posterior estimation: an MLP mapping x to mixture-density
parameters over theta, trained by maximum conditional likelihood.

The mixture lives in standardized-theta space; densities in natural units
subtract the log Jacobian of the affine standardization, and samples map back
through it.  Samples falling outside the prior support are redrawn (the
mixture carries a little mass beyond bounded supports); density outside the
support is -inf for consistency with the support contract.
"""

import numpy as np

from ..nn.mdn import mdn_log_density, mdn_params_from_raw, mdn_sample, \
    raw_dim
from ..nn.net import mlp_forward
from ..nn.train import Standardizer, TrainConfig, train_mdn
from .base import PosteriorEstimator

REJECT_ROUNDS = 200


class NpeEstimator(PosteriorEstimator):
    method = "npe"

    def __init__(self, weights, x_norm, t_norm, n_components, prior,
                 benchmark_id, encode=None, x_o=None, meta=None):
        super().__init__(benchmark_id=benchmark_id, prior=prior,
                         normalized=True, x_o=x_o, meta=meta)
        self.weights = weights
        self.x_norm = x_norm
        self.t_norm = t_norm
        self.n_components = int(n_components)
        self._encode = encode
        self._log_jacobian = float(np.sum(np.log(self.t_norm.std)))

    def encode_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self._encode is None:
            return x
        return self._encode(x[None, :])[0]

    def mixture_at(self, x):
        """MdnParams (in standardized theta space) for one observation."""
        x = self.check_x(x)
        fx = self.x_norm.apply(self.encode_x(x))
        raw = mlp_forward(self.weights, fx[None, :])[0]
        return mdn_params_from_raw(raw, self.n_components, self.prior.dim)

    def log_density(self, theta, x):
        theta, squeeze = self.theta2d(theta)
        params = self.mixture_at(x)
        z = self.t_norm.apply(theta)
        out = np.atleast_1d(mdn_log_density(params, z)) - self._log_jacobian
        log_prior = np.atleast_1d(self.prior.log_density(theta))
        out = np.where(np.isfinite(log_prior), out, -np.inf)
        return float(out[0]) if squeeze else out

    def sample(self, m, x, rng):
        params = self.mixture_at(x)
        gen = rng.gen
        out = np.empty((m, self.prior.dim))
        filled = 0
        for _ in range(REJECT_ROUNDS):
            need = m - filled
            if need == 0:
                break
            draws = self.t_norm.invert(mdn_sample(params, need, gen))
            ok = self.prior.contains(draws)
            take = draws[ok]
            out[filled:filled + take.shape[0]] = take
            filled += take.shape[0]
        if filled < m:
            # pathological mixture with almost no mass in the support:
            # clamp the remainder to the box edge rather than loop forever
            lows, highs = self.prior.grid_box()
            draws = self.t_norm.invert(mdn_sample(params, m - filled, gen))
            out[filled:] = np.clip(draws, lows, highs)
        return out

    def payload(self):
        meta = {"method": self.method, "benchmark": self.benchmark_id,
                "n_components": self.n_components, "meta": self.meta}
        arrays = {"n_layers": np.array([len(self.weights)], dtype=np.int64)}
        for i, (w, b) in enumerate(self.weights):
            arrays[f"w{i}"] = w
            arrays[f"b{i}"] = b
        arrays["x_norm_mean"] = self.x_norm.mean
        arrays["x_norm_std"] = self.x_norm.std
        arrays["t_norm_mean"] = self.t_norm.mean
        arrays["t_norm_std"] = self.t_norm.std
        if self.x_o is not None:
            arrays["x_o"] = self.x_o
        return meta, arrays

    @classmethod
    def from_payload(cls, meta, arrays, benchmark):
        n = int(arrays["n_layers"][0])
        weights = [(arrays[f"w{i}"], arrays[f"b{i}"]) for i in range(n)]
        return cls(weights=weights,
                   x_norm=Standardizer(arrays["x_norm_mean"],
                                       arrays["x_norm_std"]),
                   t_norm=Standardizer(arrays["t_norm_mean"],
                                       arrays["t_norm_std"]),
                   n_components=int(meta["n_components"]),
                   prior=benchmark.prior, benchmark_id=meta["benchmark"],
                   encode=benchmark.encode, x_o=arrays.get("x_o"),
                   meta=meta.get("meta", {}))


def train_npe(dataset, benchmark, cfg, rng, n_components=8):
    """Fit an MDN posterior estimator on a joint dataset."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    feats = benchmark.encode(dataset.xs)
    weights, x_norm, t_norm, history = train_mdn(
        feats, dataset.thetas, n_components, cfg, rng)
    meta = {"budget": len(dataset), "best_epoch": history["best_epoch"],
            "val_loss": history["val"][history["best_epoch"]]}
    return NpeEstimator(weights=weights, x_norm=x_norm, t_norm=t_norm,
                        n_components=n_components, prior=benchmark.prior,
                        benchmark_id=benchmark.id, encode=benchmark.encode,
                        meta=meta)
