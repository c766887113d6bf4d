"""Looking inside the trained model: per-filter feature maps, resynthesis
of a feature map back to audio, weight distributions, and side-by-side
comparison of two inputs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import audio_io, dsp
from .dataset import STANDARDIZE_EPS
from .errors import NoParameters
from .imaging import render_heatmap_png
from .nn.layers import softmax
from .nn.model import Model, conv_block_layer_indices

GRIFFIN_LIM_ITERATIONS = 50


@dataclass(frozen=True)
class LayerActivations:
    layer_index: int      # conv block index: 0, 1, 2
    maps: np.ndarray      # (filters, h, w), post-ReLU pre-pool

    @property
    def filter_count(self) -> int:
        return self.maps.shape[0]


@dataclass(frozen=True)
class ActivationSet:
    input_spectrogram: dsp.Spectrogram
    layers: list[LayerActivations]
    probs: np.ndarray
    predicted_label: str


@dataclass(frozen=True)
class WeightHistogram:
    layer_index: int      # index into model.layers
    bin_edges: np.ndarray  # 51 edges
    counts: np.ndarray     # 50 non-negative ints


@dataclass(frozen=True)
class ComparisonReport:
    a: ActivationSet
    b: ActivationSet
    layer_distances: list[np.ndarray]  # per block: per-filter L2 distance
    probs_l1: float


def activations(model: Model, clip: audio_io.AudioClip) -> ActivationSet:
    """Canonicalize, featurize, and run inference, capturing each conv
    block's post-ReLU maps."""
    canonical = audio_io.canonicalize(clip)
    spec = dsp.log_spectrogram(canonical, dsp.DEFAULT_FRAME_PARAMS)
    std = spec.values.std()
    feature = ((spec.values - spec.values.mean()) / (std + STANDARDIZE_EPS))
    trace = model.forward(feature[np.newaxis, :, :].astype(np.float32))

    layers = [
        LayerActivations(layer_index=block, maps=trace.outputs[stack_idx])
        for block, stack_idx in enumerate(conv_block_layer_indices(model))
    ]
    probs = softmax(trace.logits)
    return ActivationSet(
        input_spectrogram=spec,
        layers=layers,
        probs=probs,
        predicted_label=model.class_labels[int(np.argmax(probs))],
    )


def bilinear_resize(src: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Resize a 2-D array with bilinear interpolation (corners aligned)."""
    src = np.asarray(src, dtype=np.float64)
    h, w = src.shape
    out_h, out_w = shape
    ys = (np.arange(out_h) * (h - 1) / (out_h - 1)) if out_h > 1 \
        else np.zeros(out_h)
    xs = (np.arange(out_w) * (w - 1) / (out_w - 1)) if out_w > 1 \
        else np.zeros(out_w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    rows = src[y0, :] * (1.0 - fy) + src[y1, :] * fy
    return rows[:, x0] * (1.0 - fx) + rows[:, x1] * fx


def feature_to_audio(activation_map: np.ndarray,
                     reference: dsp.Spectrogram,
                     iterations: int = GRIFFIN_LIM_ITERATIONS) -> audio_io.AudioClip:
    """Resynthesize a feature map as audio.

    The map is resized to the reference spectrogram's grid, rescaled into
    its log-magnitude range, exponentiated to a magnitude surface, and
    phase-reconstructed. A degenerate all-equal map yields silence.
    """
    m = np.asarray(activation_map, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"want a non-empty 2-D map, got shape {m.shape}")
    resized = bilinear_resize(m, reference.values.shape)
    lo, hi = float(resized.min()), float(resized.max())
    if hi == lo:
        n = reference.params.output_length(reference.frames)
        return audio_io.AudioClip(np.zeros(n, dtype=np.float32),
                                  reference.sample_rate)
    norm = (resized - lo) / (hi - lo)
    ref_lo = float(reference.values.min())
    ref_hi = float(reference.values.max())
    log_mag = ref_lo + norm * (ref_hi - ref_lo)
    magnitude = np.exp(log_mag)
    return dsp.griffin_lim(magnitude, reference.params,
                           reference.sample_rate, iterations)


def weight_histogram(model: Model, layer_index: int) -> WeightHistogram:
    """50 equal-width bins over a layer's weights and biases."""
    if not 0 <= layer_index < len(model.layers):
        raise NoParameters(f"no layer at index {layer_index}")
    params = model.layers[layer_index].params()
    if not params:
        raise NoParameters(
            f"layer {layer_index} "
            f"({model.layers[layer_index].kind}) has no parameters")
    values = np.concatenate([p.reshape(-1) for p in params]).astype(np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        lo, hi = lo - 1e-6, hi + 1e-6
    counts, edges = np.histogram(values, bins=50, range=(lo, hi))
    return WeightHistogram(layer_index=layer_index, bin_edges=edges,
                           counts=counts.astype(np.int64))


def compare(model: Model, clip_a: audio_io.AudioClip,
            clip_b: audio_io.AudioClip) -> ComparisonReport:
    """Activations for both clips plus per-filter activation distances."""
    set_a = activations(model, clip_a)
    set_b = activations(model, clip_b)
    distances = []
    for la, lb in zip(set_a.layers, set_b.layers):
        diff = (la.maps.astype(np.float64) - lb.maps.astype(np.float64))
        distances.append(np.sqrt((diff * diff).sum(axis=(1, 2))))
    probs_l1 = float(np.abs(set_a.probs.astype(np.float64)
                            - set_b.probs.astype(np.float64)).sum())
    return ComparisonReport(a=set_a, b=set_b, layer_distances=distances,
                            probs_l1=probs_l1)


def spectrogram_to_image(spec: dsp.Spectrogram) -> bytes:
    """PNG of a spectrogram: one pixel per cell, low frequencies at the
    bottom, time left to right."""
    return render_heatmap_png(spec.values)


def feature_map_to_image(activation_map: np.ndarray) -> bytes:
    return render_heatmap_png(activation_map)


# -- canonical JSON encodings ------------------------------------------------

def _sig6(arr: np.ndarray) -> np.ndarray:
    """Round to 6 significant digits (vectorized)."""
    a = np.asarray(arr, dtype=np.float64)
    out = a.copy()
    nz = (a != 0) & np.isfinite(a)
    if np.any(nz):
        exponent = np.floor(np.log10(np.abs(a[nz])))
        scale = np.power(10.0, 5.0 - exponent)
        out[nz] = np.round(a[nz] * scale) / scale
    return out


def _nested(arr: np.ndarray) -> list:
    return _sig6(arr).tolist()


def activation_set_to_json(acts: ActivationSet) -> dict:
    return {
        "predicted_label": acts.predicted_label,
        "probs": _nested(acts.probs),
        "input_spectrogram": {
            "frames": acts.input_spectrogram.frames,
            "bins": acts.input_spectrogram.bins,
            "values": _nested(acts.input_spectrogram.values),
        },
        "layers": [
            {
                "layer_index": la.layer_index,
                "filters": la.filter_count,
                "map_height": int(la.maps.shape[1]),
                "map_width": int(la.maps.shape[2]),
                "maps": _nested(la.maps),
            }
            for la in acts.layers
        ],
    }


def comparison_report_to_json(report: ComparisonReport) -> dict:
    return {
        "a": activation_set_to_json(report.a),
        "b": activation_set_to_json(report.b),
        "layer_distances": [_nested(d) for d in report.layer_distances],
        "probs_l1": float(_sig6(np.array(report.probs_l1))),
    }
