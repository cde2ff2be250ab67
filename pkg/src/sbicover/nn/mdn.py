"""Mixture-density head: K diagonal Gaussians over a d-dimensional target.

The network's raw output vector of length K + 2*K*d is split into mixture
logits, component means, and pre-softplus scales.  Scales get a small floor so
components cannot collapse to zero width.  Gradients of the mean negative log
likelihood w.r.t. the raw outputs are computed in closed form (responsibility-
weighted), so the MLP backward pass can chain straight through.
"""

from dataclasses import dataclass

import numpy as np

SCALE_FLOOR = 1e-3


def raw_dim(k, d):
    return k + 2 * k * d


def _softplus(s):
    return np.logaddexp(0.0, s)


def _sigmoid(s):
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    es = np.exp(s[~pos])
    out[~pos] = es / (1.0 + es)
    return out


@dataclass
class MdnParams:
    """Mixture parameters for a single conditioning input."""

    log_weights: np.ndarray  # (K,), logs of weights summing to 1
    means: np.ndarray        # (K, d)
    scales: np.ndarray       # (K, d), > 0

    @property
    def n_components(self):
        return self.log_weights.shape[0]

    @property
    def dim(self):
        return self.means.shape[1]


def split_raw(raw, k, d):
    """Batch split: raw (B, K+2Kd) -> logits (B,K), means (B,K,d), pre-scales."""
    raw = np.asarray(raw, dtype=np.float64)
    b = raw.shape[0]
    logits = raw[:, :k]
    means = raw[:, k:k + k * d].reshape(b, k, d)
    pre_scales = raw[:, k + k * d:].reshape(b, k, d)
    return logits, means, pre_scales


def mdn_params_from_raw(raw, k, d):
    """Mixture parameters from one raw head output of length K + 2Kd."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape != (raw_dim(k, d),):
        raise ValueError(f"raw has shape {raw.shape}, expected ({raw_dim(k, d)},)")
    logits, means, pre_scales = split_raw(raw[None, :], k, d)
    log_w = logits[0] - _logsumexp(logits[0])
    return MdnParams(log_weights=log_w, means=means[0],
                     scales=_softplus(pre_scales[0]) + SCALE_FLOOR)


def _logsumexp(a, axis=None):
    hi = np.max(a, axis=axis, keepdims=True)
    out = hi + np.log(np.sum(np.exp(a - hi), axis=axis, keepdims=True))
    return out if axis is None else np.squeeze(out, axis=axis)


def mdn_log_density(params, theta):
    """log density of the mixture at theta ((d,) or (B, d))."""
    theta = np.asarray(theta, dtype=np.float64)
    squeeze = theta.ndim == 1
    if squeeze:
        theta = theta[None, :]
    d = params.dim
    if theta.shape[1] != d:
        raise ValueError(f"theta has dim {theta.shape[1]}, expected {d}")
    diff = theta[:, None, :] - params.means[None, :, :]   # (B, K, d)
    z = diff / params.scales[None, :, :]
    comp = (-0.5 * np.sum(z * z, axis=2)
            - np.sum(np.log(params.scales), axis=1)[None, :]
            - 0.5 * d * np.log(2 * np.pi))
    out = _logsumexp(params.log_weights[None, :] + comp, axis=1)
    return float(out[0]) if squeeze else out


def mdn_sample(params, m, gen):
    """Ancestral sampling: component by weight, then the diagonal Gaussian."""
    if m < 1:
        raise ValueError("m must be >= 1")
    weights = np.exp(params.log_weights)
    weights = weights / weights.sum()
    comps = gen.choice(params.n_components, size=m, p=weights)
    eps = gen.standard_normal((m, params.dim))
    return params.means[comps] + params.scales[comps] * eps


def mdn_loss_and_grad(raw, thetas, k):
    """Mean NLL over the batch and its gradient w.r.t. the raw head outputs.

    raw: (B, K+2Kd) network outputs; thetas: (B, d) targets.
    Returns (loss, draw) with draw shaped like raw.
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    b, d = thetas.shape
    logits, means, pre_scales = split_raw(raw, k, d)
    log_w = logits - _logsumexp(logits, axis=1)[:, None]
    sigma = _softplus(pre_scales) + SCALE_FLOOR
    diff = thetas[:, None, :] - means                     # (B, K, d)
    z = diff / sigma
    comp = (-0.5 * np.sum(z * z, axis=2)
            - np.sum(np.log(sigma), axis=2)
            - 0.5 * d * np.log(2 * np.pi))                # (B, K)
    joint = log_w + comp
    logp = _logsumexp(joint, axis=1)                      # (B,)
    loss = -float(np.mean(logp))
    resp = np.exp(joint - logp[:, None])                  # (B, K)
    soft = np.exp(log_w)
    d_logits = resp - soft
    d_means = resp[:, :, None] * diff / (sigma * sigma)
    d_sigma = resp[:, :, None] * (diff * diff / sigma ** 3 - 1.0 / sigma)
    d_pre = d_sigma * _sigmoid(pre_scales)
    draw = np.concatenate(
        [d_logits, d_means.reshape(b, -1), d_pre.reshape(b, -1)], axis=1)
    return loss, -draw / b
