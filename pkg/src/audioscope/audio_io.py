"""WAV ingest/emit and waveform canonicalization.

Everything downstream works on :class:`AudioClip`: a mono float32 waveform
in [-1, 1] plus its sample rate. The parser accepts the common PCM flavors
(8/16/24-bit integer, 32-bit float, mono or stereo); the writer always emits
canonical 16-bit PCM mono with a 44-byte header.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import MalformedWav, UnsupportedEncoding

# All model-bound audio is brought to this rate and duration before
# feature extraction.
CANONICAL_RATE = 16000
CANONICAL_SECONDS = 1.0


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class AudioClip:
    """Mono waveform; samples are float32 in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def duration_ms(self) -> float:
        return 1000.0 * len(self.samples) / self.sample_rate


def clip_from_samples(samples, sample_rate: int) -> AudioClip:
    """Build a clip from any float sequence, clamping into [-1, 1]."""
    arr = np.asarray(samples, dtype=np.float32).reshape(-1)
    return AudioClip(np.clip(arr, -1.0, 1.0), int(sample_rate))


def _iter_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + size > len(data):
            raise MalformedWav(f"chunk {cid!r} declares {size} bytes "
                               f"but only {len(data) - body_start} remain")
        yield cid, data[body_start:body_start + size]
        pos = body_start + size + (size & 1)  # chunks are word-aligned


def load_wav(data: bytes) -> AudioClip:
    """Parse a RIFF/WAVE byte string into a mono AudioClip.

    Stereo is averaged to mono; integer samples are scaled to [-1, 1] by
    the type's max magnitude, then clamped.
    """
    if len(data) < 12 or data[:4] != b"RIFF":
        raise MalformedWav("missing RIFF magic")
    if data[8:12] != b"WAVE":
        raise MalformedWav("missing WAVE form type")

    fmt = None
    payload = None
    for cid, body in _iter_chunks(data):
        if cid == b"fmt " and fmt is None:
            if len(body) < 16:
                raise MalformedWav("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data" and payload is None:
            payload = body
    if fmt is None:
        raise MalformedWav("no fmt chunk")
    if payload is None:
        raise MalformedWav("no data chunk")

    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if rate <= 0:
        raise MalformedWav("non-positive sample rate")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels (want 1 or 2)")

    if audio_format == 1 and bits == 16:
        n = len(payload) // 2
        raw = np.frombuffer(payload, dtype="<i2", count=n)
        samples = raw.astype(np.float32) / 32768.0
    elif audio_format == 1 and bits == 8:
        raw = np.frombuffer(payload, dtype=np.uint8)
        samples = (raw.astype(np.float32) - 128.0) / 128.0
    elif audio_format == 1 and bits == 24:
        n = len(payload) // 3
        b = np.frombuffer(payload, dtype=np.uint8, count=n * 3)
        b = b.reshape(-1, 3).astype(np.int32)
        val = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        val = (val ^ 0x800000) - 0x800000  # sign-extend
        samples = val.astype(np.float32) / 8388608.0
    elif audio_format == 3 and bits == 32:
        n = len(payload) // 4
        samples = np.frombuffer(payload, dtype="<f4", count=n).copy()
    else:
        raise UnsupportedEncoding(
            f"format tag {audio_format} with {bits}-bit samples")

    if channels == 2:
        samples = samples[:2 * (len(samples) // 2)]
        samples = samples.reshape(-1, 2).mean(axis=1)

    return clip_from_samples(samples, rate)


def write_wav(clip: AudioClip) -> bytes:
    """Serialize to 16-bit PCM mono RIFF/WAVE (canonical 44-byte header)."""
    quantized = np.round(
        np.clip(clip.samples, -1.0, 1.0) * 32767.0).astype("<i2")
    payload = quantized.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16,
        1,                       # PCM
        1,                       # mono
        clip.sample_rate,
        clip.sample_rate * 2,    # byte rate
        2,                       # block align
        16,                      # bits per sample
        b"data", len(payload),
    )
    return header + payload


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Linear-interpolation resampling; identity when rates match."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return clip
    n_in = len(clip.samples)
    n_out = _round_half_up(n_in * target_rate / clip.sample_rate)
    if n_in == 0 or n_out == 0:
        return AudioClip(np.zeros(n_out, dtype=np.float32), target_rate)
    positions = np.arange(n_out) * (clip.sample_rate / target_rate)
    positions = np.minimum(positions, n_in - 1)
    out = np.interp(positions, np.arange(n_in), clip.samples.astype(np.float64))
    return AudioClip(out.astype(np.float32), target_rate)


def fit_to_duration(clip: AudioClip, seconds: float) -> AudioClip:
    """Truncate or zero-pad (at the end) to exactly round(seconds * rate)."""
    if seconds <= 0:
        raise ValueError("seconds must be positive")
    target = _round_half_up(seconds * clip.sample_rate)
    n = len(clip.samples)
    if n == target:
        return clip
    if n > target:
        return AudioClip(clip.samples[:target].copy(), clip.sample_rate)
    out = np.zeros(target, dtype=np.float32)
    out[:n] = clip.samples
    return AudioClip(out, clip.sample_rate)


def canonicalize(clip: AudioClip,
                 rate: int = CANONICAL_RATE,
                 seconds: float = CANONICAL_SECONDS) -> AudioClip:
    """Resample to the model rate and fit to the model clip length."""
    return fit_to_duration(resample(clip, rate), seconds)
