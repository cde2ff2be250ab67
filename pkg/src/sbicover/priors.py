"""Prior distributions over simulator parameters.

All priors share the same small interface:
    dim             parameter dimension
    sample(n, gen)  -> (n, dim) float64
    log_density(t)  -> float for t of shape (dim,), (B,) for shape (B, dim)
    contains(t)     -> bool / bool array, True where density > 0
    grid_box()      -> (lows, highs) finite box covering effectively all mass
"""

import numpy as np


def _atleast_2d(theta, dim):
    theta = np.asarray(theta, dtype=np.float64)
    squeeze = theta.ndim == 1
    if squeeze:
        theta = theta[None, :]
    if theta.ndim != 2 or theta.shape[1] != dim:
        raise ValueError(f"theta has shape {theta.shape}, expected (*, {dim})")
    return theta, squeeze


class UniformBox:
    """Independent uniforms on [low_j, high_j]."""

    def __init__(self, lows, highs):
        self.lows = np.asarray(lows, dtype=np.float64)
        self.highs = np.asarray(highs, dtype=np.float64)
        if self.lows.shape != self.highs.shape or self.lows.ndim != 1:
            raise ValueError("lows/highs must be 1-d and the same length")
        if np.any(self.highs <= self.lows):
            raise ValueError("each high must exceed its low")
        self.dim = self.lows.size
        self._logdens = -float(np.sum(np.log(self.highs - self.lows)))

    def sample(self, n, gen):
        return gen.uniform(self.lows, self.highs, size=(n, self.dim))

    def contains(self, theta):
        theta, squeeze = _atleast_2d(theta, self.dim)
        ok = np.all((theta >= self.lows) & (theta <= self.highs), axis=1)
        return bool(ok[0]) if squeeze else ok

    def log_density(self, theta):
        theta, squeeze = _atleast_2d(theta, self.dim)
        out = np.where(
            np.all((theta >= self.lows) & (theta <= self.highs), axis=1),
            self._logdens, -np.inf)
        return float(out[0]) if squeeze else out

    def grid_box(self):
        return self.lows.copy(), self.highs.copy()


class LogUniformBox:
    """Independent log-uniforms on [low_j, high_j], lows > 0."""

    def __init__(self, lows, highs):
        self.lows = np.asarray(lows, dtype=np.float64)
        self.highs = np.asarray(highs, dtype=np.float64)
        if self.lows.shape != self.highs.shape or self.lows.ndim != 1:
            raise ValueError("lows/highs must be 1-d and the same length")
        if np.any(self.lows <= 0) or np.any(self.highs <= self.lows):
            raise ValueError("need 0 < low < high per dimension")
        self.dim = self.lows.size
        self._log_ranges = np.log(self.highs) - np.log(self.lows)

    def sample(self, n, gen):
        u = gen.uniform(np.log(self.lows), np.log(self.highs),
                        size=(n, self.dim))
        return np.exp(u)

    def contains(self, theta):
        theta, squeeze = _atleast_2d(theta, self.dim)
        ok = np.all((theta >= self.lows) & (theta <= self.highs), axis=1)
        return bool(ok[0]) if squeeze else ok

    def log_density(self, theta):
        # density 1 / (theta_j * log(high_j/low_j)) inside the box
        theta, squeeze = _atleast_2d(theta, self.dim)
        inside = np.all((theta >= self.lows) & (theta <= self.highs), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            body = -np.sum(np.log(theta), axis=1) - np.sum(np.log(self._log_ranges))
        out = np.where(inside, body, -np.inf)
        return float(out[0]) if squeeze else out

    def grid_box(self):
        return self.lows.copy(), self.highs.copy()


class IndependentNormal:
    """Independent normals N(mean_j, std_j^2)."""

    GRID_SIGMAS = 8.0  # grid_box truncation; mass outside ~1e-15

    def __init__(self, means, stds):
        self.means = np.asarray(means, dtype=np.float64)
        self.stds = np.asarray(stds, dtype=np.float64)
        if self.means.shape != self.stds.shape or self.means.ndim != 1:
            raise ValueError("means/stds must be 1-d and the same length")
        if np.any(self.stds <= 0):
            raise ValueError("stds must be positive")
        self.dim = self.means.size
        self._lognorm = -0.5 * self.dim * np.log(2 * np.pi) - float(
            np.sum(np.log(self.stds)))

    def sample(self, n, gen):
        return self.means + self.stds * gen.standard_normal((n, self.dim))

    def contains(self, theta):
        theta, squeeze = _atleast_2d(theta, self.dim)
        ok = np.all(np.isfinite(theta), axis=1)
        return bool(ok[0]) if squeeze else ok

    def log_density(self, theta):
        theta, squeeze = _atleast_2d(theta, self.dim)
        z = (theta - self.means) / self.stds
        out = self._lognorm - 0.5 * np.sum(z * z, axis=1)
        return float(out[0]) if squeeze else out

    def grid_box(self):
        half = self.GRID_SIGMAS * self.stds
        return self.means - half, self.means + half
