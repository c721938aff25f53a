"""Autoencoder model: seeded initialization, forward pass, loss.

A model is a preset plus one (kernel, bias) pair per conv layer. Weights
are float32; inference is pure (no layer state), so a trained model can be
shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import generator
from .layers import Conv2d, MaxPool2, ReLU, Sigmoid, Upsample2
from .presets import CaePreset, LayerSpec, code_shape


def _make_layer(spec: LayerSpec, weight=None, bias=None):
    if spec.kind == "conv":
        return Conv2d(weight, bias, spec.stride)
    return {"relu": ReLU, "sigmoid": Sigmoid, "maxpool2": MaxPool2, "upsample2": Upsample2}[
        spec.kind
    ]()


@dataclass
class CaeModel:
    preset: CaePreset
    layers: list
    encoder_len: int

    @property
    def input_size(self) -> int:
        return self.preset.input_size

    @property
    def conv_layers(self) -> list[Conv2d]:
        return [l for l in self.layers if isinstance(l, Conv2d)]

    def parameters(self) -> list[np.ndarray]:
        params: list[np.ndarray] = []
        for conv in self.conv_layers:
            params.extend((conv.weight, conv.bias))
        return params

    def copy(self) -> "CaeModel":
        return _from_weights(
            self.preset, [(c.weight.copy(), c.bias.copy()) for c in self.conv_layers]
        )

    def astype(self, dtype) -> "CaeModel":
        return _from_weights(
            self.preset,
            [(c.weight.astype(dtype), c.bias.astype(dtype)) for c in self.conv_layers],
        )

    # Convenience method forms of the module-level functions.
    def forward(self, batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return forward(self, batch)

    def encode(self, batch: np.ndarray) -> np.ndarray:
        return encode(self, batch)

    def reconstruct(self, batch: np.ndarray) -> np.ndarray:
        return reconstruct(self, batch)


def _from_weights(preset: CaePreset, weights: list[tuple[np.ndarray, np.ndarray]]) -> CaeModel:
    layers = []
    wi = 0
    for spec in preset.encoder + preset.decoder:
        if spec.kind == "conv":
            w, b = weights[wi]
            wi += 1
            layers.append(_make_layer(spec, w, b))
        else:
            layers.append(_make_layer(spec))
    return CaeModel(preset=preset, layers=layers, encoder_len=len(preset.encoder))


def _activation_after(specs: tuple[LayerSpec, ...], conv_index: int) -> str:
    """The first activation kind after a given layer index ('relu'/'sigmoid')."""
    for spec in specs[conv_index + 1 :]:
        if spec.kind in ("relu", "sigmoid"):
            return spec.kind
    return "linear"


def init_model(preset: CaePreset, seed: int) -> CaeModel:
    """Fan-in-scaled normal init: variance 2/fan_in into relu, 1/fan_in into
    sigmoid or linear; biases zero. Deterministic per seed."""
    rng = generator(seed)
    specs = preset.encoder + preset.decoder
    weights = []
    for i, spec in enumerate(specs):
        if spec.kind != "conv":
            continue
        fan_in = spec.in_channels * spec.kernel_size * spec.kernel_size
        gain = 2.0 if _activation_after(specs, i) == "relu" else 1.0
        std = float(np.sqrt(gain / fan_in))
        w = rng.normal(0.0, std, (spec.out_channels, spec.in_channels, spec.kernel_size, spec.kernel_size))
        weights.append((w.astype(np.float32), np.zeros(spec.out_channels, dtype=np.float32)))
    return _from_weights(preset, weights)


def _run(model: CaeModel, batch: np.ndarray, keep_caches: bool):
    if batch.ndim != 4 or batch.shape[1] != 3:
        raise ValueError(f"expected a (batch, 3, H, W) tensor, got shape {batch.shape}")
    if batch.shape[2] != model.input_size or batch.shape[3] != model.input_size:
        raise ValueError(
            f"model expects {model.input_size}x{model.input_size} inputs, "
            f"got {batch.shape[2]}x{batch.shape[3]}"
        )
    x = batch
    caches = []
    code = None
    for i, layer in enumerate(model.layers):
        x, cache = layer.forward(x)
        if keep_caches:
            caches.append(cache)
        if i + 1 == model.encoder_len:
            code = x
    return code, x, caches


def forward(model: CaeModel, batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the full autoencoder; returns (code, reconstruction)."""
    code, recon, _ = _run(model, batch, keep_caches=False)
    return code, recon


def encode(model: CaeModel, batch: np.ndarray) -> np.ndarray:
    return forward(model, batch)[0]


def reconstruct(model: CaeModel, batch: np.ndarray) -> np.ndarray:
    return forward(model, batch)[1]


def flat_code_dim(preset: CaePreset) -> int:
    c, h, w = code_shape(preset)
    return c * h * w


def loss_mse(reconstruction: np.ndarray, target: np.ndarray) -> float:
    """Mean over all elements of the squared difference."""
    if reconstruction.shape != target.shape:
        raise ValueError(
            f"shape mismatch: {reconstruction.shape} vs {target.shape}"
        )
    diff = reconstruction.astype(np.float64) - target.astype(np.float64)
    return float(np.mean(diff * diff))


def loss_mse_grad(reconstruction: np.ndarray, target: np.ndarray) -> np.ndarray:
    """d(mse)/d(reconstruction), in the reconstruction's dtype."""
    scale = 2.0 / reconstruction.size
    return ((reconstruction - target) * reconstruction.dtype.type(scale)).astype(
        reconstruction.dtype
    )
