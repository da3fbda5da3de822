"""Network layers with explicit forward/backward passes.

Activations are float32 NCHW numpy arrays.  Each layer caches what its
backward pass needs; ``backward`` consumes the upstream gradient and
returns the input gradient, accumulating parameter gradients on the
layer (``grads`` pairs with ``params``).
"""

from __future__ import annotations

import numpy as np

from .. import _kernels
from ..core import ShapeError


class Layer:
    """Stateless base: parameter-free layers only override forward/backward."""

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[np.ndarray]:
        return []

    def grads(self) -> list[np.ndarray]:
        return []

    def spec(self) -> dict:
        return {"kind": type(self).__name__}


class Conv2d(Layer):
    """Cross-correlation with zero padding; exact analytic gradients."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int = 3,
                 stride: int = 1, pad: int = 1, *, rng: np.random.Generator):
        fan_in = in_channels * kernel * kernel
        limit = np.sqrt(6.0 / fan_in)
        self.w = rng.uniform(-limit, limit,
                             (out_channels, in_channels, kernel, kernel)
                             ).astype(np.float32)
        self.b = np.zeros(out_channels, dtype=np.float32)
        self.stride = stride
        self.pad = pad
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.w.shape[1]:
            raise ShapeError(
                f"conv2d expected (N, {self.w.shape[1]}, H, W), got {x.shape}")
        self._x = x if train else None
        return _kernels.conv2d_forward(x, self.w, self.b, self.stride, self.pad)

    def backward(self, dy):
        if self._x is None:
            raise RuntimeError("backward before forward(train=True)")
        dx, self.dw, self.db = _kernels.conv2d_backward(
            self._x, self.w, dy, self.stride, self.pad)
        return dx

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]

    def spec(self):
        return {"kind": "Conv2d", "in": int(self.w.shape[1]),
                "out": int(self.w.shape[0]), "kernel": int(self.w.shape[2]),
                "stride": self.stride, "pad": self.pad}


class ReLU(Layer):
    def __init__(self):
        self._mask: np.ndarray | None = None

    def forward(self, x, train=False):
        if train:
            self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, dy):
        if self._mask is None:
            raise RuntimeError("backward before forward(train=True)")
        return dy * self._mask


class MaxPool2x2(Layer):
    def __init__(self):
        self._idx: np.ndarray | None = None

    def forward(self, x, train=False):
        if x.ndim != 4:
            raise ShapeError(f"maxpool expects 4-d input, got shape {x.shape}")
        out, idx = _kernels.maxpool2x2_forward(x)
        self._idx = idx if train else None
        return out

    def backward(self, dy):
        if self._idx is None:
            raise RuntimeError("backward before forward(train=True)")
        return _kernels.maxpool2x2_backward(dy, self._idx)


class Flatten(Layer):
    def __init__(self):
        self._shape: tuple | None = None

    def forward(self, x, train=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int, *,
                 rng: np.random.Generator):
        limit = np.sqrt(6.0 / in_features)
        self.w = rng.uniform(-limit, limit,
                             (in_features, out_features)).astype(np.float32)
        self.b = np.zeros(out_features, dtype=np.float32)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x, train=False):
        if x.ndim != 2 or x.shape[1] != self.w.shape[0]:
            raise ShapeError(
                f"dense expected (N, {self.w.shape[0]}), got {x.shape}")
        self._x = x if train else None
        return x @ self.w + self.b

    def backward(self, dy):
        if self._x is None:
            raise RuntimeError("backward before forward(train=True)")
        self.dw = self._x.T @ dy
        self.db = dy.sum(axis=0)
        return dy @ self.w.T

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]

    def spec(self):
        return {"kind": "Dense", "in": int(self.w.shape[0]),
                "out": int(self.w.shape[1])}


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax via a stable log-sum-exp."""
    shifted = logits.astype(np.float64) - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over the batch.

    Returns (loss, probabilities, gradient w.r.t. logits); the gradient
    is (p - onehot) / batch so it pairs with the mean loss.
    """
    if logits.ndim != 2:
        raise ShapeError(f"logits must be (batch, classes), got {logits.shape}")
    labels = np.asarray(labels)
    n, k = logits.shape
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} != ({n},)")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    probs = softmax(logits)
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, probs, grad.astype(logits.dtype)
