"""Training loop: Adam on per-element MSE over shuffled mini-batches.

Training consumes in-spec samples only; the returned model is the snapshot
with the lowest validation loss (earliest epoch wins ties). With a fixed
seed the whole run is bit-reproducible: shuffling, input corruption and the
optimizer state all derive from ``TrainConfig.seed``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import derive_seed, generator
from .model import CaeModel, _run, loss_mse, loss_mse_grad


class TrainingDivergedError(RuntimeError):
    """Raised when train or validation loss becomes non-finite."""

    def __init__(self, epoch: int, where: str):
        super().__init__(f"non-finite {where} loss at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    corruption_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.corruption_fraction < 1.0:
            raise ValueError("corruption_fraction must be in [0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


class Adam:
    """Standard Adam over a fixed list of parameter arrays (updated in place)."""

    def __init__(self, params: list[np.ndarray], config: TrainConfig):
        self.params = params
        self.lr = config.learning_rate
        self.beta1, self.beta2, self.eps = config.beta1, config.beta2, config.epsilon
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= (self.lr / b1t) * m / (np.sqrt(v / b2t) + self.eps)


def corrupt_batch(batch: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Zero exactly floor(fraction * elements-per-sample) distinct elements
    per sample, chosen uniformly. Used on the encoder input only; the loss
    target stays clean."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must be in [0, 1)")
    if fraction == 0.0:
        return batch
    out = batch.copy()
    per_sample = int(np.prod(batch.shape[1:]))
    n_zero = int(np.floor(fraction * per_sample))
    if n_zero == 0:
        return out
    rng = generator(seed)
    flat = out.reshape(batch.shape[0], per_sample)
    for b in range(batch.shape[0]):
        idx = rng.choice(per_sample, size=n_zero, replace=False)
        flat[b, idx] = 0.0
    return out


def _backward(model: CaeModel, caches: list, recon: np.ndarray, target: np.ndarray):
    """Gradients of loss_mse w.r.t. every conv weight/bias, in model order."""
    grad = loss_mse_grad(recon, target)
    grads_rev: list[np.ndarray] = []
    for layer, cache in zip(reversed(model.layers), reversed(caches)):
        if hasattr(layer, "weight"):
            grad, dw, db = layer.backward(grad, cache)
            grads_rev.extend((db, dw))
        else:
            grad = layer.backward(grad, cache)
    return list(reversed(grads_rev))


def _epoch_losses(model: CaeModel, data: np.ndarray, batch_size: int) -> float:
    """Weighted-mean reconstruction loss over a dataset, no training."""
    total = 0.0
    for start in range(0, data.shape[0], batch_size):
        batch = data[start : start + batch_size]
        _, recon, _ = _run(model, batch, keep_caches=False)
        total += loss_mse(recon, batch) * batch.shape[0]
    return total / data.shape[0]


def train(
    model: CaeModel,
    train_set: np.ndarray,
    val_set: np.ndarray,
    config: TrainConfig,
) -> tuple[CaeModel, dict]:
    """Train a copy of `model`; returns (best-val snapshot, history).

    history has per-epoch "train_loss" and "val_loss" lists plus the
    snapshot's "best_epoch" (1-based).
    """
    if train_set.shape[0] == 0:
        raise ValueError("training set is empty")
    if val_set.shape[0] == 0:
        raise ValueError("validation set is empty")
    model = model.copy()
    opt = Adam(model.parameters(), config)
    shuffle_rng = generator(derive_seed(config.seed, "shuffle"))
    n = train_set.shape[0]
    history: dict = {"train_loss": [], "val_loss": []}
    best_val = np.inf
    best_epoch = 0
    best_weights = None

    for epoch in range(1, config.epochs + 1):
        perm = shuffle_rng.permutation(n)
        total = 0.0
        for bi, start in enumerate(range(0, n, config.batch_size)):
            batch = train_set[perm[start : start + config.batch_size]]
            x_in = batch
            if config.corruption_fraction > 0.0:
                x_in = corrupt_batch(
                    batch,
                    config.corruption_fraction,
                    derive_seed(config.seed, "corrupt", epoch, bi),
                )
            _, recon, caches = _run(model, x_in, keep_caches=True)
            batch_loss = loss_mse(recon, batch)
            if not np.isfinite(batch_loss):
                raise TrainingDivergedError(epoch, "train")
            total += batch_loss * batch.shape[0]
            grads = _backward(model, caches, recon, batch)
            opt.step(grads)
        history["train_loss"].append(total / n)

        val_loss = _epoch_losses(model, val_set, config.batch_size)
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(epoch, "validation")
        history["val_loss"].append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_weights = [(c.weight.copy(), c.bias.copy()) for c in model.conv_layers]

    for conv, (w, b) in zip(model.conv_layers, best_weights):
        conv.weight, conv.bias = w, b
    history["best_epoch"] = best_epoch
    return model, history
