"""Digit-subset dataset scanning, deterministic splits, featurization.

Expected layout is the public speech-commands convention:
``<root>/<class_name>/*.wav`` where class names are the ten English digit
words. Split assignment hashes the relative path, so membership is stable
across runs and machines without a stored split file.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import audio_io, dsp
from .errors import AudioError, ConfigError, DatasetNotFound, EmptyClass
from .nn.model import DIGIT_LABELS

STANDARDIZE_EPS = 1e-6


@dataclass(frozen=True)
class LabeledExample:
    clip_path: Path
    label: str
    split: str  # "train" | "val"

    @property
    def label_index(self) -> int:
        return DIGIT_LABELS.index(self.label)


@dataclass
class TrainConfig:
    dataset_root: Path
    checkpoint_path: Path | None = None
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    val_fraction: float = 0.1

    def __post_init__(self):
        self.dataset_root = Path(self.dataset_root)
        if self.checkpoint_path is not None:
            self.checkpoint_path = Path(self.checkpoint_path)
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError(
                f"val_fraction must be in (0,1), got {self.val_fraction}")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ConfigError("learning_rate must be positive and finite")


def split_for_path(rel_path: str, val_fraction: float) -> str:
    """Stable hash split: val iff sha1(path) mod 100 < round(100*fraction)."""
    digest = hashlib.sha1(rel_path.encode("utf-8")).digest()
    bucket = int.from_bytes(digest[:8], "little") % 100
    threshold = int(math.floor(100.0 * val_fraction + 0.5))
    return "val" if bucket < threshold else "train"


def scan_dataset(root, val_fraction: float = 0.1) -> list[LabeledExample]:
    """Collect the ten digit classes under ``root``, sorted and split."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetNotFound(f"{root} is not a directory")
    examples: list[LabeledExample] = []
    found_any = False
    for label in DIGIT_LABELS:
        class_dir = root / label
        if not class_dir.is_dir():
            continue
        found_any = True
        wavs = sorted(p for p in class_dir.iterdir()
                      if p.is_file() and p.suffix.lower() == ".wav")
        if not wavs:
            raise EmptyClass(f"class directory {class_dir} has no .wav files")
        for path in wavs:
            rel = path.relative_to(root).as_posix()
            examples.append(LabeledExample(
                clip_path=path, label=label,
                split=split_for_path(rel, val_fraction)))
    if not found_any:
        raise DatasetNotFound(
            f"{root} contains none of the digit class directories")
    examples.sort(key=lambda e: e.clip_path)
    return examples


def featurize_clip(clip: audio_io.AudioClip) -> np.ndarray:
    """Canonicalize and turn a clip into the model's 1x98x257 input.

    Log-spectrogram, then per-example standardization (subtract mean,
    divide by std + eps). A constant spectrogram (silence) maps to zeros.
    """
    canonical = audio_io.canonicalize(clip)
    spec = dsp.log_spectrogram(canonical, dsp.DEFAULT_FRAME_PARAMS)
    values = spec.values
    std = values.std()
    standardized = (values - values.mean()) / (std + STANDARDIZE_EPS)
    return standardized[np.newaxis, :, :].astype(np.float32)


def featurize(example: LabeledExample) -> tuple[np.ndarray, int]:
    """Load one example from disk -> (feature tensor, class index)."""
    try:
        clip = audio_io.load_wav(example.clip_path.read_bytes())
    except AudioError as exc:
        raise type(exc)(f"{example.clip_path}: {exc}") from exc
    if len(clip) == 0:
        raise AudioError(f"{example.clip_path}: empty clip")
    return featurize_clip(clip), example.label_index
