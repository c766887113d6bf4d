"""Binary model checkpoints with bit-exact weight round-trip.

Layout (all integers little-endian):

    magic "DDVS" | u32 format version | u32 layer count
    per layer: u8 kind tag
               u32 rank, rank x u32 extents   (weight tensor dims)
               f32 x prod(extents) weights, then f32 biases

Bias length is implied by the kind (conv: extents[0], dense: extents[1],
none otherwise). Dropout stores its rate as a single f32 "weight" with
extents [1]. Class labels are the fixed ten-digit list, not serialized.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import BadMagic, CheckpointError, Truncated, VersionMismatch
from .layers import Conv2D, Dense, Dropout, Flatten, MaxPool2D, ReLU, Softmax
from .model import DIGIT_LABELS, MODEL_INPUT_SHAPE, Model

MAGIC = b"DDVS"
FORMAT_VERSION = 1

_KIND_TAGS = {"conv2d": 1, "maxpool2": 2, "relu": 3, "dropout": 4,
              "flatten": 5, "dense": 6, "softmax": 7}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}


def save_checkpoint(model: Model) -> bytes:
    out = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(model.layers))]
    for layer in model.layers:
        out.append(struct.pack("<B", _KIND_TAGS[layer.kind]))
        if layer.kind in ("conv2d", "dense"):
            w, b = layer.weights, layer.bias
            out.append(struct.pack("<I", w.ndim))
            out.append(struct.pack(f"<{w.ndim}I", *w.shape))
            out.append(np.ascontiguousarray(w, "<f4").tobytes())
            out.append(np.ascontiguousarray(b, "<f4").tobytes())
        elif layer.kind == "dropout":
            out.append(struct.pack("<II", 1, 1))
            out.append(struct.pack("<f", layer.rate))
        else:
            out.append(struct.pack("<I", 0))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise Truncated(
                f"need {n} bytes at offset {self.pos}, "
                f"have {len(self.data) - self.pos}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u8(self) -> int:
        return self.take(1)[0]

    def f32_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4").copy()


def load_checkpoint(data: bytes) -> Model:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise BadMagic("not a model checkpoint (bad magic)")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"format version {version}, "
                              f"expected {FORMAT_VERSION}")
    n_layers = r.u32()
    layers = []
    for _ in range(n_layers):
        tag = r.u8()
        kind = _TAG_KINDS.get(tag)
        if kind is None:
            raise CheckpointError(f"unknown layer tag {tag}")
        rank = r.u32()
        extents = [r.u32() for _ in range(rank)]
        if kind == "conv2d":
            if rank != 4:
                raise CheckpointError(f"conv weights rank {rank}")
            c_out, c_in, kh, kw = extents
            w = r.f32_array(c_out * c_in * kh * kw).reshape(extents)
            b = r.f32_array(c_out)
            layers.append(Conv2D(c_in, c_out, kh, weights=w, bias=b))
        elif kind == "dense":
            if rank != 2:
                raise CheckpointError(f"dense weights rank {rank}")
            in_dim, out_dim = extents
            w = r.f32_array(in_dim * out_dim).reshape(extents)
            b = r.f32_array(out_dim)
            layers.append(Dense(in_dim, out_dim, weights=w, bias=b))
        elif kind == "dropout":
            if rank != 1 or extents != [1]:
                raise CheckpointError("dropout payload must be one float")
            layers.append(Dropout(float(r.f32_array(1)[0])))
        else:
            if rank != 0:
                raise CheckpointError(f"{kind} carries no parameters")
            layers.append({"maxpool2": MaxPool2D, "relu": ReLU,
                           "flatten": Flatten, "softmax": Softmax}[kind]())
    if r.pos != len(data):
        raise CheckpointError(f"{len(data) - r.pos} trailing bytes")
    return Model(layers, class_labels=DIGIT_LABELS,
                 input_shape=MODEL_INPUT_SHAPE)


def save_checkpoint_file(model: Model, path) -> None:
    with open(path, "wb") as f:
        f.write(save_checkpoint(model))


def load_checkpoint_file(path) -> Model:
    with open(path, "rb") as f:
        return load_checkpoint(f.read())
