"""Fully connected networks with SELU activations and reverse-mode gradients.

Weights are a list of (W, b) with W of shape (fan_in, fan_out).  Hidden layers
apply SELU; the final layer is affine.  The backward pass consumes the cache
produced by mlp_forward_cached and the gradient of the loss w.r.t. the output,
and returns per-layer (dW, db) of the same shapes as the weights.
"""

import numpy as np

SELU_ALPHA = 1.6732632423543772
SELU_SCALE = 1.0507009873554805


def selu(z):
    # clamp keeps expm1 off the discarded positive branch (overflow noise)
    neg = np.minimum(z, 0.0)
    return SELU_SCALE * np.where(z > 0, z, SELU_ALPHA * np.expm1(neg))


def selu_deriv(z):
    neg = np.minimum(z, 0.0)
    return SELU_SCALE * np.where(z > 0, 1.0, SELU_ALPHA * np.exp(neg))


def init_mlp(sizes, gen):
    """Scaled-uniform fan-in init: W, b ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    weights = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        w = gen.uniform(-bound, bound, size=(fan_in, fan_out))
        b = gen.uniform(-bound, bound, size=fan_out)
        weights.append((w, b))
    return weights


def mlp_forward_cached(weights, x):
    """Forward pass keeping pre-activations for the backward pass.

    x: (batch, fan_in).  Returns (output (batch, fan_out), cache).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != weights[0][0].shape[0]:
        raise ValueError(f"input has shape {x.shape}, expected "
                         f"(*, {weights[0][0].shape[0]})")
    activations = [x]
    pre = []
    h = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(weights):
        z = h @ w + b
        if i < last:
            pre.append(z)
            h = selu(z)
            activations.append(h)
        else:
            h = z
    return h, (activations, pre)


def mlp_forward(weights, x):
    out, _ = mlp_forward_cached(weights, x)
    return out


def mlp_backward(weights, cache, dout):
    """Gradients of a scalar loss given d(loss)/d(output).

    Returns [(dW, db), ...] matching weights.  Gradients are summed over the
    batch; divide dout by the batch size upstream for means.
    """
    activations, pre = cache
    grads = [None] * len(weights)
    delta = np.asarray(dout, dtype=np.float64)
    for i in range(len(weights) - 1, -1, -1):
        a_in = activations[i]
        grads[i] = (a_in.T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ weights[i][0].T) * selu_deriv(pre[i - 1])
    return grads
