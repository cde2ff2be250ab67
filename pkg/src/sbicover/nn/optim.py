"""AdamW: adaptive moments with bias correction and decoupled weight decay.

Per step t, for each tensor p with gradient g:
    m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
    m_hat = m / (1 - b1^t);  v_hat = v / (1 - b2^t)
    p <- p (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps)
Decay applies to weight matrices and biases alike (simple and uniform).
"""

import numpy as np


class AdamState:
    def __init__(self, weights):
        self.t = 0
        self.m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in weights]
        self.v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in weights]


def adamw_step(weights, grads, state, lr, wd, beta1=0.9, beta2=0.999,
               eps=1e-8):
    """One in-place-style update; returns the new weights list."""
    state.t += 1
    t = state.t
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    out = []
    for i, ((w, b), (gw, gb)) in enumerate(zip(weights, grads)):
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            raise FloatingPointError(f"non-finite gradient at layer {i}")
        mw, mb = state.m[i]
        vw, vb = state.v[i]
        mw = beta1 * mw + (1.0 - beta1) * gw
        mb = beta1 * mb + (1.0 - beta1) * gb
        vw = beta2 * vw + (1.0 - beta2) * gw * gw
        vb = beta2 * vb + (1.0 - beta2) * gb * gb
        state.m[i] = (mw, mb)
        state.v[i] = (vw, vb)
        new_w = w * (1.0 - lr * wd) - lr * (mw / c1) / (np.sqrt(vw / c2) + eps)
        new_b = b * (1.0 - lr * wd) - lr * (mb / c1) / (np.sqrt(vb / c2) + eps)
        out.append((new_w, new_b))
    return out
