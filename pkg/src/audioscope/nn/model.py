"""The digit-classifier model: an ordered layer stack with trace capture.

Default architecture for 1x98x257 log-spectrogram inputs:

    Conv(1->16, k7) ReLU Pool | Conv(16->16, k5) ReLU Pool |
    Conv(16->32, k3) ReLU Pool | Flatten Dropout(0.3)
    Dense(8352->128) ReLU Dropout(0.3) Dense(128->10)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from .layers import (Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2D, ReLU,
                     softmax)

DIGIT_LABELS = ("zero", "one", "two", "three", "four",
                "five", "six", "seven", "eight", "nine")

MODEL_INPUT_SHAPE = (1, 98, 257)

# Filter counts and square kernel sizes of the three conv blocks.
CONV_FILTERS = (16, 16, 32)
CONV_KERNELS = (7, 5, 3)
DENSE_WIDTH = 128
DROPOUT_RATE = 0.3


@dataclass
class ForwardTrace:
    """Per-layer record of one forward pass."""

    logits: np.ndarray
    outputs: list[np.ndarray]   # output of every layer, in stack order
    caches: list                # backward-pass caches, same order


class Model:
    def __init__(self, layers: list[Layer],
                 class_labels: tuple[str, ...] = DIGIT_LABELS,
                 input_shape: tuple[int, ...] = MODEL_INPUT_SHAPE):
        self.layers = list(layers)
        self.class_labels = tuple(class_labels)
        self.input_shape = tuple(input_shape)
        out_shape = self.output_shapes()[-1]
        if out_shape != (len(self.class_labels),):
            raise ShapeMismatch(
                f"final layer emits {out_shape}, expected "
                f"({len(self.class_labels)},) for the label set")

    def output_shapes(self) -> list[tuple[int, ...]]:
        shapes = []
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
            shapes.append(shape)
        return shapes

    def parameters(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def forward(self, x: np.ndarray, training: bool = False,
                rng=None) -> ForwardTrace:
        x = np.ascontiguousarray(x, dtype=np.float32)
        if x.shape != self.input_shape:
            raise ShapeMismatch(
                f"input {x.shape} != model input {self.input_shape}")
        if not np.all(np.isfinite(x)):
            raise ShapeMismatch("input contains NaN or Inf")
        outputs, caches = [], []
        for layer in self.layers:
            x, cache = layer.forward(x, training=training, rng=rng)
            outputs.append(x)
            caches.append(cache)
        return ForwardTrace(logits=x, outputs=outputs, caches=caches)

    def backward(self, trace: ForwardTrace,
                 grad_logits: np.ndarray) -> list[list[np.ndarray]]:
        """Per-layer parameter gradients (same nesting as layer.params())."""
        g = np.ascontiguousarray(grad_logits, dtype=np.float32)
        grads: list[list[np.ndarray]] = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            g, layer_grads = self.layers[i].backward(trace.caches[i], g)
            grads[i] = layer_grads
        return grads

    def predict_probs(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.forward(x).logits)


def build_model(seed: int = 0,
                input_shape: tuple[int, ...] = MODEL_INPUT_SHAPE,
                class_labels: tuple[str, ...] = DIGIT_LABELS) -> Model:
    """Construct the default architecture with seeded weight init."""
    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    in_ch = input_shape[0]
    shape = input_shape
    for filters, kernel in zip(CONV_FILTERS, CONV_KERNELS):
        layers.append(Conv2D(in_ch, filters, kernel, rng=rng))
        shape = layers[-1].output_shape(shape)
        layers.append(ReLU())
        layers.append(MaxPool2D())
        shape = (shape[0], shape[1] // 2, shape[2] // 2)
        in_ch = filters
    layers.append(Flatten())
    flat = int(np.prod(shape))
    layers.append(Dropout(DROPOUT_RATE))
    layers.append(Dense(flat, DENSE_WIDTH, rng=rng))
    layers.append(ReLU())
    layers.append(Dropout(DROPOUT_RATE))
    layers.append(Dense(DENSE_WIDTH, len(class_labels), rng=rng))
    return Model(layers, class_labels=class_labels, input_shape=input_shape)


def conv_block_layer_indices(model: Model) -> list[int]:
    """Stack indices of the ReLU directly after each conv (the tap points
    for feature-map introspection: post-activation, pre-pool)."""
    indices = []
    for i, layer in enumerate(model.layers[:-1]):
        if layer.kind == "conv2d" and model.layers[i + 1].kind == "relu":
            indices.append(i + 1)
    return indices
