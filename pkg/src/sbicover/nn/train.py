"""Training loops: generic engine, binary classifier head, MDN head.

Model selection: the validation loss is evaluated before training (epoch 0,
the freshly initialized weights) and after every epoch; the weights with the
lowest validation loss are returned.  Splits are contiguous 90/10 by default
(datasets are i.i.d. draws, so contiguity costs nothing and keeps splits
deterministic).
"""

from dataclasses import dataclass, field

import numpy as np

from .mdn import mdn_loss_and_grad, raw_dim
from .net import init_mlp, mlp_backward, mlp_forward, mlp_forward_cached
from .optim import AdamState, adamw_step


class TrainingError(Exception):
    pass


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 128
    lr: float = 1e-3
    weight_decay: float = 0.01
    val_fraction: float = 0.1
    hidden: tuple = (128, 128, 128)

    def __post_init__(self):
        if (self.epochs <= 0 or self.batch_size <= 0 or self.lr <= 0
                or self.weight_decay < 0
                or not 0 < self.val_fraction < 1):
            raise ValueError("invalid training configuration")
        self.hidden = tuple(int(h) for h in self.hidden)


@dataclass
class Standardizer:
    """Per-feature affine normalizer fit on training data."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x):
        x = np.asarray(x, dtype=np.float64)
        std = x.std(axis=0)
        return cls(mean=x.mean(axis=0), std=np.where(std < 1e-8, 1.0, std))

    def apply(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def invert(self, z):
        return np.asarray(z, dtype=np.float64) * self.std + self.mean


def _clone(weights):
    return [(w.copy(), b.copy()) for w, b in weights]


def split_train_val(n, val_fraction):
    n_val = int(val_fraction * n)
    if n_val < 1:
        raise TrainingError(
            f"validation split empty ({n} rows at fraction {val_fraction})")
    return n - n_val, n_val


def fit_network(weights, cfg, gen, n_train, make_batch, loss_grad, val_loss):
    """Generic epoch loop.

    make_batch(idx) -> (X, target) builds a minibatch from training-row
    indices; loss_grad(out, target) -> (mean loss, d loss / d out);
    val_loss(weights) -> scalar.  Returns (best weights, history).
    """
    state = AdamState(weights)
    best_val = val_loss(weights)
    best = (_clone(weights), 0)
    history = {"train": [], "val": [best_val]}
    for epoch in range(1, cfg.epochs + 1):
        perm = gen.permutation(n_train)
        epoch_losses = []
        for start in range(0, n_train, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            x, target = make_batch(idx)
            out, cache = mlp_forward_cached(weights, x)
            loss, dout = loss_grad(out, target)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite training loss at epoch {epoch}")
            grads = mlp_backward(weights, cache, dout)
            weights = adamw_step(weights, grads, state, cfg.lr,
                                 cfg.weight_decay)
            epoch_losses.append(loss)
        vl = val_loss(weights)
        history["train"].append(float(np.mean(epoch_losses)))
        history["val"].append(vl)
        if vl < best_val:
            best_val = vl
            best = (_clone(weights), epoch)
    history["best_epoch"] = best[1]
    return best[0], history


def bce_loss_grad(z, y):
    """Mean binary cross entropy with logits; z (B, 1), y (B,) in {0,1}."""
    z = z[:, 0]
    loss = np.mean(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z))))
    p = 1.0 / (1.0 + np.exp(-z))
    return float(loss), ((p - y) / z.shape[0])[:, None]


def train_classifier(features, labels, cfg, rng):
    """Binary classifier on static labeled rows.

    Returns (weights, standardizer, history).  Features are standardized by
    training-split statistics; labels must all be 0 or 1.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise ValueError("labels must be 0 or 1")
    n = features.shape[0]
    n_train, _ = split_train_val(n, cfg.val_fraction)
    norm = Standardizer.fit(features[:n_train])
    feats = norm.apply(features)
    x_train, y_train = feats[:n_train], labels[:n_train]
    x_val, y_val = feats[n_train:], labels[n_train:]
    gen = rng.gen
    weights = init_mlp([features.shape[1], *cfg.hidden, 1], gen)

    def make_batch(idx):
        return x_train[idx], y_train[idx]

    def val_loss(ws):
        return bce_loss_grad(mlp_forward(ws, x_val), y_val)[0]

    weights, history = fit_network(weights, cfg, gen, n_train, make_batch,
                                   bce_loss_grad, val_loss)
    return weights, norm, history


def train_mdn(features, targets, n_components, cfg, rng):
    """Conditional mixture density fit by maximum likelihood.

    Returns (weights, feature standardizer, target standardizer, history).
    Targets are standardized too; the density in natural units is the learned
    density minus sum(log target_std) with means/scales mapped back affinely.
    """
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if features.shape[0] == 0:
        raise ValueError("empty dataset")
    n = features.shape[0]
    d = targets.shape[1]
    n_train, _ = split_train_val(n, cfg.val_fraction)
    f_norm = Standardizer.fit(features[:n_train])
    t_norm = Standardizer.fit(targets[:n_train])
    feats = f_norm.apply(features)
    tgts = t_norm.apply(targets)
    x_train, t_train = feats[:n_train], tgts[:n_train]
    x_val, t_val = feats[n_train:], tgts[n_train:]
    gen = rng.gen
    weights = init_mlp([features.shape[1], *cfg.hidden,
                        raw_dim(n_components, d)], gen)

    def make_batch(idx):
        return x_train[idx], t_train[idx]

    def loss_grad(out, target):
        loss, dout = mdn_loss_and_grad(out, target, n_components)
        if not np.isfinite(loss):
            raise TrainingError("degenerate mixture scales: non-finite loss")
        return loss, dout

    def val_loss(ws):
        return mdn_loss_and_grad(mlp_forward(ws, x_val), t_val,
                                 n_components)[0]

    weights, history = fit_network(weights, cfg, gen, n_train, make_batch,
                                   loss_grad, val_loss)
    return weights, f_norm, t_norm, history
