"""Finite-difference verification of the hand-derived backprop.

Runs a float64 shadow copy of the model, compares analytic parameter
gradients of the reconstruction loss against central differences, and
returns the worst relative error over the sampled parameters.
"""

from __future__ import annotations

import numpy as np

from ..rng import derive_seed, generator
from .model import CaeModel, _run, loss_mse
from .training import _backward


def _loss_at(model: CaeModel, batch: np.ndarray) -> float:
    _, recon, _ = _run(model, batch, keep_caches=False)
    return loss_mse(recon, batch)


def gradient_check(
    model: CaeModel,
    batch: np.ndarray,
    epsilon: float = 1e-5,
    max_params_per_tensor: int = 20,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and numeric parameter gradients.

    Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    At most `max_params_per_tensor` entries are probed per weight/bias tensor
    (seeded choice), which bounds runtime on larger topologies.
    """
    m64 = model.astype(np.float64)
    x64 = batch.astype(np.float64)
    _, recon, caches = _run(m64, x64, keep_caches=True)
    grads = _backward(m64, caches, recon, x64)
    params = m64.parameters()

    worst = 0.0
    for ti, (param, grad) in enumerate(zip(params, grads)):
        flat_p = param.reshape(-1)
        flat_g = grad.reshape(-1)
        n = flat_p.size
        if n <= max_params_per_tensor:
            indices = np.arange(n)
        else:
            rng = generator(derive_seed(seed, "gradcheck", ti))
            indices = rng.choice(n, size=max_params_per_tensor, replace=False)
        for idx in indices:
            orig = flat_p[idx]
            flat_p[idx] = orig + epsilon
            loss_plus = _loss_at(m64, x64)
            flat_p[idx] = orig - epsilon
            loss_minus = _loss_at(m64, x64)
            flat_p[idx] = orig
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            analytic = float(flat_g[idx])
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, rel)
    return worst


def numeric_gradient(
    model: CaeModel, batch: np.ndarray, tensor_index: int, flat_index: int, epsilon: float
) -> float:
    """Central-difference gradient of one parameter entry (float64 path)."""
    m64 = model.astype(np.float64)
    x64 = batch.astype(np.float64)
    flat = m64.parameters()[tensor_index].reshape(-1)
    orig = flat[flat_index]
    flat[flat_index] = orig + epsilon
    loss_plus = _loss_at(m64, x64)
    flat[flat_index] = orig - epsilon
    loss_minus = _loss_at(m64, x64)
    flat[flat_index] = orig
    return (loss_plus - loss_minus) / (2.0 * epsilon)
