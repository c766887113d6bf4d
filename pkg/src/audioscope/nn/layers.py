"""Layer objects: stateless forward/backward around the kernel functions.

Layers never cache activations on themselves; ``forward`` returns
``(output, cache)`` and ``backward`` consumes that cache. This keeps a
model shareable across threads during inference while training threads
own their tapes.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from . import kernels


def he_uniform_limit(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


class Layer:
    kind: str = "?"

    def params(self) -> list[np.ndarray]:
        return []

    def forward(self, x, training: bool = False, rng=None):
        raise NotImplementedError

    def backward(self, cache, gy):
        raise NotImplementedError

    def output_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        return in_shape

    def __repr__(self):
        return f"<{type(self).__name__}>"


class Conv2D(Layer):
    kind = "conv2d"

    def __init__(self, in_ch: int, out_ch: int, kernel: int,
                 weights: np.ndarray | None = None,
                 bias: np.ndarray | None = None, rng=None):
        self.in_ch, self.out_ch, self.kernel = in_ch, out_ch, kernel
        if weights is None:
            limit = he_uniform_limit(in_ch * kernel * kernel,
                                     out_ch * kernel * kernel)
            rng = rng or np.random.default_rng()
            weights = rng.uniform(-limit, limit,
                                  (out_ch, in_ch, kernel, kernel))
        if bias is None:
            bias = np.zeros(out_ch)
        self.weights = np.ascontiguousarray(weights, dtype=np.float32)
        self.bias = np.ascontiguousarray(bias, dtype=np.float32)
        if self.weights.shape != (out_ch, in_ch, kernel, kernel):
            raise ShapeMismatch(f"conv weights {self.weights.shape}")

    def params(self):
        return [self.weights, self.bias]

    def forward(self, x, training=False, rng=None):
        return kernels.conv2d_forward(x, self.weights, self.bias), x

    def backward(self, cache, gy):
        gx, gw, gb = kernels.conv2d_backward(cache, self.weights, gy)
        return gx, [gw, gb]

    def output_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.in_ch:
            raise ShapeMismatch(f"expected {self.in_ch} channels, got {c}")
        return (self.out_ch, h - self.kernel + 1, w - self.kernel + 1)

    def __repr__(self):
        return f"<Conv2D {self.in_ch}->{self.out_ch} k{self.kernel}>"


class MaxPool2D(Layer):
    kind = "maxpool2"

    def forward(self, x, training=False, rng=None):
        out, idx = kernels.maxpool2_forward(x)
        return out, (idx, x.shape[1], x.shape[2])

    def backward(self, cache, gy):
        idx, h, w = cache
        return kernels.maxpool2_backward(idx, gy, h, w), []

    def output_shape(self, in_shape):
        c, h, w = in_shape
        return (c, h // 2, w // 2)


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, training=False, rng=None):
        return np.maximum(x, 0.0), x

    def backward(self, cache, gy):
        return gy * (cache > 0), []


class Dropout(Layer):
    """Inverted dropout: identity at inference; at training each value is
    zeroed independently with probability ``rate`` and survivors scaled by
    1/(1-rate)."""

    kind = "dropout"

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0,1), got {rate}")
        self.rate = float(rate)

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            return x, None
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        mask = (rng.random(x.shape) >= self.rate)
        scale = np.float32(1.0 / (1.0 - self.rate))
        return x * mask * scale, (mask, scale)

    def backward(self, cache, gy):
        if cache is None:
            return gy, []
        mask, scale = cache
        return gy * mask * scale, []

    def __repr__(self):
        return f"<Dropout {self.rate}>"


class Flatten(Layer):
    kind = "flatten"

    def forward(self, x, training=False, rng=None):
        return np.ascontiguousarray(x).reshape(-1), x.shape

    def backward(self, cache, gy):
        return gy.reshape(cache), []

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_dim: int, out_dim: int,
                 weights: np.ndarray | None = None,
                 bias: np.ndarray | None = None, rng=None):
        self.in_dim, self.out_dim = in_dim, out_dim
        if weights is None:
            limit = he_uniform_limit(in_dim, out_dim)
            rng = rng or np.random.default_rng()
            weights = rng.uniform(-limit, limit, (in_dim, out_dim))
        if bias is None:
            bias = np.zeros(out_dim)
        self.weights = np.ascontiguousarray(weights, dtype=np.float32)
        self.bias = np.ascontiguousarray(bias, dtype=np.float32)
        if self.weights.shape != (in_dim, out_dim):
            raise ShapeMismatch(f"dense weights {self.weights.shape}")

    def params(self):
        return [self.weights, self.bias]

    def forward(self, x, training=False, rng=None):
        return kernels.dense_forward(x, self.weights, self.bias), x

    def backward(self, cache, gy):
        gx, gw, gb = kernels.dense_backward(cache, self.weights, gy)
        return gx, [gw, gb]

    def output_shape(self, in_shape):
        if in_shape != (self.in_dim,):
            raise ShapeMismatch(f"dense expects ({self.in_dim},), "
                                f"got {in_shape}")
        return (self.out_dim,)

    def __repr__(self):
        return f"<Dense {self.in_dim}->{self.out_dim}>"


class Softmax(Layer):
    kind = "softmax"

    def forward(self, x, training=False, rng=None):
        s = softmax(x)
        return s, s

    def backward(self, cache, gy):
        s = cache
        return (s * (gy - float(np.dot(gy, s)))).astype(np.float32), []


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max subtraction)."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return (e / e.sum()).astype(np.float32)


def softmax_cross_entropy(logits: np.ndarray, true_class: int):
    """Returns (loss, grad_logits, probs) for one example.

    probs sum to 1; loss = -ln(probs[true]); grad = probs - onehot.
    """
    k = len(logits)
    if not 0 <= true_class < k:
        raise ValueError(f"true_class {true_class} outside [0, {k})")
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    log_probs = z - np.log(np.exp(z).sum())
    probs = np.exp(log_probs)
    loss = float(-log_probs[true_class])
    grad = probs.copy()
    grad[true_class] -= 1.0
    return loss, grad.astype(np.float32), probs.astype(np.float32)
