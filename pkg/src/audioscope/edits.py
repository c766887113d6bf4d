"""Waveform manipulations for generating adversarial variants of an input.

Six operators: slice, cross-fade, loudness split, repeat, invert (time
reversal), and symmetric fade-in/out. Each is a pure function returning a
new clip at the same sample rate; :func:`apply` composes a JSON-encodable
op list left to right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .audio_io import AudioClip
from .errors import (EditError, FadeTooLong, InvalidRange, OverlapTooLong,
                     RateMismatch, UnknownEditOp)

EDIT_KINDS = ("slice", "cross_fade", "loudness", "repeat", "invert", "fade")


@dataclass(frozen=True)
class EditOp:
    """One manipulation step; ``params`` depend on ``kind``.

    slice: start_ms, end_ms | cross_fade: overlap_ms | loudness: gain_db
    repeat: count | invert: (none) | fade: fade_ms
    """

    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj: dict) -> "EditOp":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise UnknownEditOp(f"not an edit op: {obj!r}")
        kind = obj["kind"]
        if kind not in EDIT_KINDS:
            raise UnknownEditOp(f"unknown edit kind {kind!r}")
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise UnknownEditOp("params must be an object")
        return cls(kind, dict(params))


def _ms_to_samples(ms: float, rate: int) -> int:
    return int(math.floor(ms * rate / 1000.0 + 0.5))


def slice_clip(clip: AudioClip, start_ms: float, end_ms: float) -> AudioClip:
    """Samples in [start, end), converted from milliseconds."""
    if not (0 <= start_ms < end_ms <= clip.duration_ms):
        raise InvalidRange(
            f"slice [{start_ms}, {end_ms}) ms outside clip of "
            f"{clip.duration_ms:.3f} ms")
    start = _ms_to_samples(start_ms, clip.sample_rate)
    end = min(_ms_to_samples(end_ms, clip.sample_rate), len(clip.samples))
    if start >= end:
        raise InvalidRange("slice range is empty after rounding")
    return AudioClip(clip.samples[start:end].copy(), clip.sample_rate)


def cross_fade(a: AudioClip, b: AudioClip, overlap_ms: float) -> AudioClip:
    """Overlap-add a's tail into b's head with complementary linear ramps."""
    if a.sample_rate != b.sample_rate:
        raise RateMismatch(f"{a.sample_rate} Hz vs {b.sample_rate} Hz")
    overlap = _ms_to_samples(overlap_ms, a.sample_rate)
    if overlap < 0 or overlap > min(len(a.samples), len(b.samples)):
        raise OverlapTooLong(
            f"overlap {overlap} exceeds min clip length "
            f"{min(len(a.samples), len(b.samples))}")
    if overlap == 0:
        out = np.concatenate([a.samples, b.samples])
        return AudioClip(out.copy(), a.sample_rate)

    ramp_up = np.arange(overlap, dtype=np.float64) / overlap
    ramp_down = 1.0 - ramp_up  # the two sum to exactly 1 everywhere
    mixed = (a.samples[-overlap:].astype(np.float64) * ramp_down
             + b.samples[:overlap].astype(np.float64) * ramp_up)
    out = np.concatenate([
        a.samples[:-overlap].astype(np.float64) if overlap < len(a.samples)
        else np.empty(0),
        mixed,
        b.samples[overlap:].astype(np.float64),
    ])
    return AudioClip(np.clip(out, -1.0, 1.0).astype(np.float32), a.sample_rate)


def change_loudness(clip: AudioClip, gain_db: float = 6.0) -> AudioClip:
    """Boost the first half by gain_db and cut the second half by the same."""
    if not math.isfinite(gain_db):
        raise EditError("gain_db must be finite")
    half = len(clip.samples) // 2
    factor = 10.0 ** (gain_db / 20.0)
    out = clip.samples.astype(np.float64).copy()
    out[:half] *= factor
    out[half:] /= factor
    return AudioClip(np.clip(out, -1.0, 1.0).astype(np.float32),
                     clip.sample_rate)


def repeat(clip: AudioClip, count: int = 2) -> AudioClip:
    if count < 1:
        raise EditError(f"repeat count must be >= 1, got {count}")
    return AudioClip(np.tile(clip.samples, count), clip.sample_rate)


def invert(clip: AudioClip) -> AudioClip:
    """Time reversal (play from the end), not a polarity flip."""
    return AudioClip(clip.samples[::-1].copy(), clip.sample_rate)


def fade(clip: AudioClip, fade_ms: float) -> AudioClip:
    """Linear fade-in over the first fade_ms and fade-out over the last."""
    if fade_ms < 0:
        raise FadeTooLong("fade_ms must be >= 0")
    n = len(clip.samples)
    fade_len = _ms_to_samples(fade_ms, clip.sample_rate)
    if fade_len == 0:
        return clip
    if 2 * fade_len > n:
        raise FadeTooLong(f"2 x {fade_len} fade samples > clip length {n}")
    gains = np.ones(n, dtype=np.float64)
    gains[:fade_len] = np.arange(fade_len) / fade_len          # 0 .. 1-1/f
    gains[n - fade_len:] = np.arange(fade_len, 0, -1) / fade_len  # 1 .. 1/f
    out = clip.samples.astype(np.float64) * gains
    return AudioClip(out.astype(np.float32), clip.sample_rate)


def _apply_one(clip: AudioClip, op: EditOp) -> AudioClip:
    p = op.params
    if op.kind == "slice":
        return slice_clip(clip, float(p["start_ms"]), float(p["end_ms"]))
    if op.kind == "cross_fade":
        # On a single clip the halves are cross-faded around the midpoint.
        half = len(clip.samples) // 2
        a = AudioClip(clip.samples[:half].copy(), clip.sample_rate)
        b = AudioClip(clip.samples[half:].copy(), clip.sample_rate)
        return cross_fade(a, b, float(p.get("overlap_ms", 0.0)))
    if op.kind == "loudness":
        return change_loudness(clip, float(p.get("gain_db", 6.0)))
    if op.kind == "repeat":
        return repeat(clip, int(p.get("count", 2)))
    if op.kind == "invert":
        return invert(clip)
    if op.kind == "fade":
        return fade(clip, float(p.get("fade_ms", 0.0)))
    raise UnknownEditOp(f"unknown edit kind {op.kind!r}")


def apply(clip: AudioClip, ops: list[EditOp]) -> AudioClip:
    """Left-to-right composition; failures carry the index of the bad op."""
    current = clip
    for i, op in enumerate(ops):
        try:
            current = _apply_one(current, op)
        except EditError as exc:
            exc.op_index = i
            raise
        except (KeyError, TypeError, ValueError) as exc:
            err = EditError(f"op {i} ({op.kind}): bad parameters: {exc}")
            err.op_index = i
            raise err from exc
    return current
