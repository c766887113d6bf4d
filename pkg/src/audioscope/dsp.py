"""Time-frequency analysis: STFT, log-magnitude features, Griffin-Lim.

Frame geometry is fixed and explicit: no center padding, so a clip of
``n`` samples yields exactly ``1 + (n - frame_len) // hop`` frames and the
inverse transform returns ``frame_len + (frames - 1) * hop`` samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip
from .errors import ClipTooShort

LOG_EPS = 1e-10


@dataclass(frozen=True)
class FrameParams:
    """STFT framing: 25 ms Hann frames hopped by 10 ms at 16 kHz by default."""

    frame_len: int = 400
    hop: int = 160
    fft_size: int = 512

    def __post_init__(self):
        if not (0 < self.frame_len <= self.fft_size):
            raise ValueError("need 0 < frame_len <= fft_size")
        if not (0 < self.hop <= self.frame_len):
            raise ValueError("need 0 < hop <= frame_len")
        if self.fft_size & (self.fft_size - 1):
            raise ValueError("fft_size must be a power of two")

    @property
    def bins(self) -> int:
        return self.fft_size // 2 + 1

    def frame_count(self, n_samples: int) -> int:
        if n_samples < self.frame_len:
            raise ClipTooShort(
                f"{n_samples} samples < frame_len {self.frame_len}")
        return 1 + (n_samples - self.frame_len) // self.hop

    def output_length(self, frames: int) -> int:
        return self.frame_len + (frames - 1) * self.hop


DEFAULT_FRAME_PARAMS = FrameParams()


@dataclass(frozen=True)
class ComplexSpectrogram:
    values: np.ndarray  # (frames, bins) complex
    params: FrameParams
    sample_rate: int

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def bins(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Spectrogram:
    """Log-magnitude spectrogram: ln(|STFT| + eps)."""

    values: np.ndarray  # (frames, bins) float
    params: FrameParams
    sample_rate: int

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def bins(self) -> int:
        return self.values.shape[1]


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann window (both endpoints zero)."""
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / (n - 1)))


def _frame_signal(x: np.ndarray, params: FrameParams) -> np.ndarray:
    frames = 1 + (len(x) - params.frame_len) // params.hop
    idx = (np.arange(frames)[:, None] * params.hop
           + np.arange(params.frame_len)[None, :])
    return x[idx]


def stft(clip: AudioClip, params: FrameParams = DEFAULT_FRAME_PARAMS) -> ComplexSpectrogram:
    """Hann-windowed STFT, frames zero-padded to fft_size, no centering."""
    x = clip.samples.astype(np.float64)
    if len(x) < params.frame_len:
        raise ClipTooShort(f"{len(x)} samples < frame_len {params.frame_len}")
    windowed = _frame_signal(x, params) * hann_window(params.frame_len)
    values = np.fft.rfft(windowed, n=params.fft_size, axis=1)
    return ComplexSpectrogram(values, params, clip.sample_rate)


def log_spectrogram(clip: AudioClip,
                    params: FrameParams = DEFAULT_FRAME_PARAMS) -> Spectrogram:
    spec = stft(clip, params)
    return Spectrogram(np.log(np.abs(spec.values) + LOG_EPS),
                       params, clip.sample_rate)


def istft(spec: ComplexSpectrogram) -> AudioClip:
    """Overlap-add inverse with synthesis Hann window and window-sum
    normalization."""
    params = spec.params
    win = hann_window(params.frame_len)
    frames = np.fft.irfft(spec.values, n=params.fft_size, axis=1)
    frames = frames[:, :params.frame_len] * win

    n_out = params.output_length(spec.frames)
    out = np.zeros(n_out)
    win_sum = np.zeros(n_out)
    win_sq = win * win
    for t in range(spec.frames):
        start = t * params.hop
        out[start:start + params.frame_len] += frames[t]
        win_sum[start:start + params.frame_len] += win_sq
    nonzero = win_sum > 1e-10
    out[nonzero] /= win_sum[nonzero]
    return AudioClip(out.astype(np.float32), spec.sample_rate)


def _convergence(candidate_mag: np.ndarray, target_mag: np.ndarray) -> float:
    denom = np.linalg.norm(target_mag)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(candidate_mag - target_mag) / denom)


def spectral_convergence(candidate: AudioClip, magnitude: np.ndarray,
                         params: FrameParams) -> float:
    """||  |STFT(x)| - target ||_F / || target ||_F"""
    return _convergence(np.abs(stft(candidate, params).values), magnitude)


def griffin_lim_with_errors(magnitude: np.ndarray,
                            params: FrameParams = DEFAULT_FRAME_PARAMS,
                            sample_rate: int = 16000,
                            iterations: int = 50):
    """Phase recovery by alternating projections, tracking convergence.

    Starting from zero phase, each iteration resynthesizes with the
    current phase estimate and re-measures the phase of the result.
    Returns ``(clip, errors)`` where ``errors[k]`` is the spectral
    convergence of iterate k (measured before the final peak
    normalization to 0.95).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    magnitude = np.asarray(magnitude, dtype=np.float64)
    if np.any(magnitude < 0):
        raise ValueError("magnitude must be non-negative")

    phase = np.zeros_like(magnitude)
    clip = None
    errors = []
    for _ in range(iterations):
        complex_spec = ComplexSpectrogram(
            magnitude * np.exp(1j * phase), params, sample_rate)
        clip = istft(complex_spec)
        reanalyzed = stft(clip, params).values
        errors.append(_convergence(np.abs(reanalyzed), magnitude))
        phase = np.angle(reanalyzed)

    peak = float(np.max(np.abs(clip.samples))) if len(clip.samples) else 0.0
    if peak > 0.0:
        samples = clip.samples * (0.95 / peak)
    else:
        samples = clip.samples
    return AudioClip(samples.astype(np.float32), sample_rate), errors


def griffin_lim(magnitude: np.ndarray,
                params: FrameParams = DEFAULT_FRAME_PARAMS,
                sample_rate: int = 16000,
                iterations: int = 50) -> AudioClip:
    """Waveform from a magnitude-only spectrogram; peak-normalized to 0.95."""
    clip, _ = griffin_lim_with_errors(magnitude, params, sample_rate,
                                      iterations)
    return clip
