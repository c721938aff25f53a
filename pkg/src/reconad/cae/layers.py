"""Network layers: conv2d, relu, sigmoid, 2x2 max-pool, 2x nearest upsample.

Layers are stateless apart from their (optional) weights. ``forward``
returns ``(output, cache)`` and ``backward(dout, cache)`` returns the
input gradient; conv additionally returns its parameter gradients. Keeping
the cache outside the layer object makes inference re-entrant.

Tensors are (batch, channels, height, width) arrays; float32 for training,
float64 for gradient checking. Convolution accumulates one kernel offset at
a time as a BLAS matmul over (batch * out_h * out_w, channels), which keeps
peak memory at one input-sized buffer per offset.
"""

from __future__ import annotations

import numpy as np


class Conv2d:
    """Cross-correlation with zero padding; padding = (kernel - 1) // 2."""

    def __init__(self, weight: np.ndarray, bias: np.ndarray, stride: int):
        self.weight = weight  # (out_c, in_c, k, k)
        self.bias = bias  # (out_c,)
        self.stride = stride
        self.padding = (weight.shape[2] - 1) // 2

    def out_size(self, size: int) -> int:
        k = self.weight.shape[2]
        return (size + 2 * self.padding - k) // self.stride + 1

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out_c, in_c, kh, kw = self.weight.shape
        b, c, h, w = x.shape
        if c != in_c:
            raise ValueError(f"expected {in_c} input channels, got {c}")
        s, p = self.stride, self.padding
        oh, ow = self.out_size(h), self.out_size(w)
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        acc = np.zeros((b * oh * ow, out_c), dtype=x.dtype)
        for i in range(kh):
            for j in range(kw):
                xs = xp[:, :, i : i + s * oh : s, j : j + s * ow : s]
                xs_r = xs.transpose(0, 2, 3, 1).reshape(-1, in_c)
                acc += xs_r @ self.weight[:, :, i, j].T
        acc += self.bias
        y = acc.reshape(b, oh, ow, out_c).transpose(0, 3, 1, 2)
        return np.ascontiguousarray(y), xp

    def backward(
        self, dout: np.ndarray, xp: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        out_c, in_c, kh, kw = self.weight.shape
        b, _, oh, ow = dout.shape
        s, p = self.stride, self.padding
        dout_r = dout.transpose(0, 2, 3, 1).reshape(-1, out_c)
        dw = np.zeros_like(self.weight)
        dxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                xs = xp[:, :, i : i + s * oh : s, j : j + s * ow : s]
                xs_r = xs.transpose(0, 2, 3, 1).reshape(-1, in_c)
                dw[:, :, i, j] = dout_r.T @ xs_r
                contrib = (dout_r @ self.weight[:, :, i, j]).reshape(b, oh, ow, in_c)
                dxp[:, :, i : i + s * oh : s, j : j + s * ow : s] += contrib.transpose(
                    0, 3, 1, 2
                )
        db = dout.sum(axis=(0, 2, 3))
        h = xp.shape[2] - 2 * p
        w = xp.shape[3] - 2 * p
        dx = dxp[:, :, p : p + h, p : p + w]
        return np.ascontiguousarray(dx), dw, db


class ReLU:
    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mask = x > 0
        return np.where(mask, x, x.dtype.type(0)), mask

    def backward(self, dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
        return np.where(mask, dout, dout.dtype.type(0))


class Sigmoid:
    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = np.empty_like(x)
        pos = x >= 0
        y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        e = np.exp(x[~pos])
        y[~pos] = e / (1.0 + e)
        return y, y

    def backward(self, dout: np.ndarray, y: np.ndarray) -> np.ndarray:
        return dout * y * (1.0 - y)


class MaxPool2:
    """2x2 max pooling, stride 2; ties route to the first element in
    row-major scan order of the window."""

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        b, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"maxpool2 needs even spatial dims, got {h}x{w}")
        tiles = x.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        flat = tiles.reshape(b, c, h // 2, w // 2, 4)
        idx = flat.argmax(axis=-1)  # first max in scan order
        y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        return np.ascontiguousarray(y), (idx, x.shape)

    def backward(self, dout: np.ndarray, cache: tuple) -> np.ndarray:
        idx, in_shape = cache
        b, c, h, w = in_shape
        dflat = np.zeros((b, c, h // 2, w // 2, 4), dtype=dout.dtype)
        np.put_along_axis(dflat, idx[..., None], dout[..., None], axis=-1)
        tiles = dflat.reshape(b, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return np.ascontiguousarray(tiles.reshape(b, c, h, w))


class Upsample2:
    """2x nearest-neighbor upsampling."""

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, None]:
        return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3), None

    def backward(self, dout: np.ndarray, cache: None) -> np.ndarray:
        b, c, h, w = dout.shape
        return dout.reshape(b, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))
