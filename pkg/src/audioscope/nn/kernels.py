"""Hot numeric kernels: convolution and max-pooling, forward and backward.

Two interchangeable backends:

* ``compiled`` -- Cython extension (:mod:`audioscope.nn._ckernels`), typed
  loops with 64-bit accumulators.
* ``python``   -- numpy/BLAS implementation (im2col GEMM for conv), also
  accumulating in 64-bit.

The compiled backend is preferred when the extension was built; set
``AUDIOSCOPE_KERNELS=python`` or ``compiled`` to force one. Both produce
float32 results that agree within normal rounding (each accumulates in
float64), but bit-reproducibility is only guaranteed within one backend.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ShapeMismatch

try:
    from . import _ckernels
except ImportError:
    _ckernels = None


def _f32(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float32)


def _check_conv_shapes(x, w, b):
    if x.ndim != 3 or w.ndim != 4 or b.ndim != 1:
        raise ShapeMismatch(
            f"conv2d wants x[C,H,W], w[O,C,k,k], b[O]; got "
            f"{x.shape}, {w.shape}, {b.shape}")
    c_out, c_in, kh, kw = w.shape
    if kh != kw:
        raise ShapeMismatch(f"kernel must be square, got {kh}x{kw}")
    if x.shape[0] != c_in:
        raise ShapeMismatch(
            f"input has {x.shape[0]} channels, weights expect {c_in}")
    if b.shape[0] != c_out:
        raise ShapeMismatch(f"bias length {b.shape[0]} != {c_out} filters")
    if x.shape[1] < kh or x.shape[2] < kw:
        raise ShapeMismatch(
            f"input {x.shape[1]}x{x.shape[2]} smaller than kernel {kh}")


# -- numpy backend -----------------------------------------------------------

def _np_im2col(x64: np.ndarray, k: int) -> np.ndarray:
    """(C,H,W) -> (Ho*Wo, C*k*k) patch matrix."""
    c, h, w = x64.shape
    windows = np.lib.stride_tricks.sliding_window_view(x64, (k, k), axis=(1, 2))
    # (C, Ho, Wo, k, k) -> (Ho, Wo, C, k, k)
    return windows.transpose(1, 2, 0, 3, 4).reshape(
        (h - k + 1) * (w - k + 1), c * k * k)


def _np_conv2d_forward(x, w, b):
    k = w.shape[2]
    c_out = w.shape[0]
    ho, wo = x.shape[1] - k + 1, x.shape[2] - k + 1
    patches = _np_im2col(x.astype(np.float64), k)
    out = patches @ w.astype(np.float64).reshape(c_out, -1).T
    out += b.astype(np.float64)
    return out.T.reshape(c_out, ho, wo).astype(np.float32)


def _np_conv2d_backward(x, w, gy):
    c_out, c_in, k, _ = w.shape
    ho, wo = gy.shape[1], gy.shape[2]
    x64 = x.astype(np.float64)
    w64 = w.astype(np.float64)
    gy64 = gy.astype(np.float64)

    gb = gy64.sum(axis=(1, 2))
    patches = _np_im2col(x64, k)                      # (Ho*Wo, C_in*k*k)
    gw = (gy64.reshape(c_out, -1) @ patches).reshape(w.shape)

    gx = np.zeros_like(x64)
    for i in range(k):
        for j in range(k):
            # gx[c, y+i, x+j] += sum_o w[o,c,i,j] * gy[o,y,x]
            gx[:, i:i + ho, j:j + wo] += np.tensordot(
                w64[:, :, i, j], gy64, axes=([0], [0]))
    return (gx.astype(np.float32), gw.astype(np.float32),
            gb.astype(np.float32))


def _np_maxpool2_forward(x):
    c, h, w = x.shape
    ho, wo = h // 2, w // 2
    blocks = x[:, :ho * 2, :wo * 2].reshape(c, ho, 2, wo, 2)
    blocks = blocks.transpose(0, 1, 3, 2, 4).reshape(c, ho, wo, 4)
    idx = blocks.argmax(axis=3).astype(np.int32)
    out = np.take_along_axis(blocks, idx[..., None], axis=3)[..., 0]
    return np.ascontiguousarray(out, dtype=np.float32), idx


def _np_maxpool2_backward(idx, gy, h, w):
    c, ho, wo = gy.shape
    gx = np.zeros((c, h, w), dtype=np.float32)
    ci, yi, xi = np.meshgrid(np.arange(c), np.arange(ho), np.arange(wo),
                             indexing="ij")
    rows = 2 * yi + idx // 2
    cols = 2 * xi + idx % 2
    gx[ci, rows, cols] = gy  # block argmax positions never collide
    return gx


# -- backend selection -------------------------------------------------------

def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _ckernels is not None else ("python",)


def _initial_backend() -> str:
    forced = os.environ.get("AUDIOSCOPE_KERNELS", "auto")
    if forced == "python":
        return "python"
    if forced == "compiled":
        if _ckernels is None:
            raise ImportError(
                "AUDIOSCOPE_KERNELS=compiled but the extension is not built")
        return "compiled"
    return "compiled" if _ckernels is not None else "python"


_backend = _initial_backend()


def get_backend() -> str:
    return _backend


def use_backend(name: str) -> None:
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available "
                         f"(have {available_backends()})")
    global _backend
    _backend = name


# -- public kernel surface ---------------------------------------------------

def conv2d_forward(x, w, b) -> np.ndarray:
    """Valid-padding stride-1 convolution: (C,H,W) -> (O, H-k+1, W-k+1)."""
    x, w, b = _f32(x), _f32(w), _f32(b)
    _check_conv_shapes(x, w, b)
    if _backend == "compiled":
        return _ckernels.conv2d_forward(x, w, b)
    return _np_conv2d_forward(x, w, b)


def conv2d_backward(x, w, gy):
    """Gradients of conv2d_forward: returns (gx, gw, gb)."""
    x, w, gy = _f32(x), _f32(w), _f32(gy)
    if x.ndim != 3 or w.ndim != 4 or gy.ndim != 3:
        raise ShapeMismatch("conv2d_backward wants x[C,H,W], w[O,C,k,k], "
                            "gy[O,Ho,Wo]")
    k = w.shape[2]
    expected = (w.shape[0], x.shape[1] - k + 1, x.shape[2] - k + 1)
    if gy.shape != expected:
        raise ShapeMismatch(f"grad shape {gy.shape} != expected {expected}")
    if _backend == "compiled":
        return _ckernels.conv2d_backward(x, w, gy)
    return _np_conv2d_backward(x, w, gy)


def maxpool2_forward(x):
    """2x2 non-overlapping max pool; trailing odd row/column dropped.

    Returns (pooled, idx) where idx holds each block's argmax position
    (0..3, row-major within the block) for routing gradients back.
    """
    x = _f32(x)
    if x.ndim != 3 or x.shape[1] < 2 or x.shape[2] < 2:
        raise ShapeMismatch(f"maxpool2 wants (C,H>=2,W>=2), got {x.shape}")
    if _backend == "compiled":
        return _ckernels.maxpool2_forward(x)
    return _np_maxpool2_forward(x)


def maxpool2_backward(idx, gy, h: int, w: int):
    gy = _f32(gy)
    idx = np.ascontiguousarray(idx, dtype=np.int32)
    if idx.shape != gy.shape:
        raise ShapeMismatch(f"idx {idx.shape} != gy {gy.shape}")
    if _backend == "compiled":
        return _ckernels.maxpool2_backward(idx, gy, h, w)
    return _np_maxpool2_backward(idx, gy, h, w)


def dense_forward(x, w, b) -> np.ndarray:
    """y = x @ w + b with 64-bit accumulation (x: (in,), w: (in,out))."""
    x, w, b = _f32(x), _f32(w), _f32(b)
    if x.ndim != 1 or w.ndim != 2 or x.shape[0] != w.shape[0] \
            or b.shape != (w.shape[1],):
        raise ShapeMismatch(
            f"dense wants x[in], w[in,out], b[out]; got "
            f"{x.shape}, {w.shape}, {b.shape}")
    y = x.astype(np.float64) @ w.astype(np.float64) + b.astype(np.float64)
    return y.astype(np.float32)


def dense_backward(x, w, gy):
    x, w, gy = _f32(x), _f32(w), _f32(gy)
    if gy.shape != (w.shape[1],):
        raise ShapeMismatch(f"grad shape {gy.shape} != ({w.shape[1]},)")
    x64, w64, gy64 = (a.astype(np.float64) for a in (x, w, gy))
    gx = w64 @ gy64
    gw = np.outer(x64, gy64)
    return (gx.astype(np.float32), gw.astype(np.float32),
            gy.astype(np.float32).copy())
