"""The posterior-estimator contract shared by every inference method.

An estimator exposes
    log_density(theta, x) -> per-row log p_hat(theta | x)
    sample(m, x, rng)     -> (m, d_theta) draws from p_hat(. | x)
plus metadata.  Amortized estimators accept any x; non-amortized ones record
the x_o they were fit to and refuse anything else.  `normalized` says whether
exp(log_density) integrates to 1 over theta (NPE, KDE, analytic oracles) or is
known only up to a constant (ratio-based estimators).
"""

import numpy as np


class EstimatorError(Exception):
    pass


class PosteriorEstimator:
    method = "base"

    def __init__(self, benchmark_id, prior, normalized, x_o=None, meta=None):
        self.benchmark_id = benchmark_id
        self.prior = prior
        self.normalized = bool(normalized)
        self.x_o = None if x_o is None else np.asarray(x_o, dtype=np.float64)
        self.meta = dict(meta or {})

    @property
    def is_amortized(self):
        return self.x_o is None

    def check_x(self, x):
        """Guard against evaluating a single-observation estimator off its x_o."""
        x = np.asarray(x, dtype=np.float64)
        if self.x_o is not None and not np.array_equal(x, self.x_o):
            raise EstimatorError(
                f"{self.method} estimator was fit to a single observation; "
                "evaluating it at a different x is not meaningful")
        return x

    def theta2d(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        squeeze = theta.ndim == 1
        if squeeze:
            theta = theta[None, :]
        if theta.shape[1] != self.prior.dim:
            raise ValueError(
                f"theta has dim {theta.shape[1]}, expected {self.prior.dim}")
        return theta, squeeze

    def log_density(self, theta, x):
        raise NotImplementedError

    def sample(self, m, x, rng):
        raise NotImplementedError

    # persistence hooks, see inference.io
    def payload(self):
        raise NotImplementedError(f"{self.method} does not support persistence")

    @classmethod
    def from_payload(cls, meta, arrays):
        raise NotImplementedError


class PriorEstimator(PosteriorEstimator):
    """The prior presented as a (deliberately uninformed) posterior.

    Useful as a calibration reference: it is exactly calibrated by
    construction and its information gain is zero.
    """

    method = "prior"

    def __init__(self, prior, benchmark_id="", meta=None):
        super().__init__(benchmark_id=benchmark_id, prior=prior,
                         normalized=True, meta=meta)

    def log_density(self, theta, x):
        theta, squeeze = self.theta2d(theta)
        self.check_x(x)
        out = np.atleast_1d(self.prior.log_density(theta))
        return float(out[0]) if squeeze else out

    def sample(self, m, x, rng):
        self.check_x(x)
        return self.prior.sample(m, rng.gen)

    def payload(self):
        return {"method": self.method, "benchmark": self.benchmark_id,
                "meta": self.meta}, {}

    @classmethod
    def from_payload(cls, meta, arrays, benchmark):
        return cls(prior=benchmark.prior, benchmark_id=meta["benchmark"],
                   meta=meta.get("meta", {}))


class GridNormalized(PosteriorEstimator):
    """Normalize an unnormalized estimator by midpoint quadrature on a grid.

    Only valid for parameter dimension <= 2.  The log normalizer is computed
    once per distinct x and cached, so repeated density calls at the same
    observation stay cheap.
    """

    def __init__(self, inner, resolution=None):
        from .samplers import default_resolution
        if inner.prior.dim > 2:
            raise EstimatorError(
                "grid normalization supports at most 2 parameter dimensions")
        super().__init__(benchmark_id=inner.benchmark_id, prior=inner.prior,
                         normalized=True, x_o=inner.x_o, meta=dict(inner.meta))
        self.inner = inner
        self.method = inner.method + "+grid"
        self.resolution = (default_resolution(inner.prior.dim)
                           if resolution is None else int(resolution))
        self._cache = {}

    def _log_z(self, x):
        from .samplers import grid_log_normalizer
        key = np.asarray(x, dtype=np.float64).tobytes()
        if key not in self._cache:
            self._cache[key] = grid_log_normalizer(
                lambda t: self.inner.log_density(t, x),
                self.prior.grid_box(), self.resolution)
        return self._cache[key]

    def log_density(self, theta, x):
        raw = self.inner.log_density(theta, x)
        return raw - self._log_z(x)

    def sample(self, m, x, rng):
        return self.inner.sample(m, x, rng)
