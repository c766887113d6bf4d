"""Mini-batch training loop and evaluation.

Deterministic by construction: weight init, epoch shuffling, and dropout
draw from independent streams derived from the config seed, examples are
processed in a fixed order, and gradients accumulate sequentially in
64-bit. The best-validation checkpoint is kept (ties go to the earlier
epoch).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledExample, TrainConfig, featurize, scan_dataset
from .errors import AudioError, ConfigError, EmptyEvalSet
from .nn import (AdamState, Model, adam_step, build_model, load_checkpoint,
                 save_checkpoint, softmax_cross_entropy)

log = logging.getLogger(__name__)


@dataclass
class TrainResult:
    model: Model
    train_loss: list[float]
    val_accuracy: list[float]
    skipped_files: list[str]
    best_epoch: int  # 1-based

    def report(self) -> dict:
        return {
            "epochs": list(range(1, len(self.train_loss) + 1)),
            "train_loss": [round(x, 6) for x in self.train_loss],
            "val_accuracy": [round(x, 6) for x in self.val_accuracy],
            "best_epoch": self.best_epoch,
            "skipped_files": list(self.skipped_files),
        }


def _featurize_all(examples: list[LabeledExample], skipped: list[str]):
    feats, labels = [], []
    for ex in examples:
        try:
            x, y = featurize(ex)
        except AudioError as exc:
            log.warning("skipping %s: %s", ex.clip_path, exc)
            skipped.append(str(ex.clip_path))
            continue
        feats.append(x)
        labels.append(y)
    return feats, labels


def accuracy_and_confusion(model: Model, feats, labels,
                           n_classes: int | None = None):
    if len(feats) == 0:
        raise EmptyEvalSet("no examples to evaluate")
    k = n_classes or len(model.class_labels)
    confusion = np.zeros((k, k), dtype=np.int64)
    for x, y in zip(feats, labels):
        pred = int(np.argmax(model.forward(x).logits))
        confusion[y, pred] += 1
    accuracy = float(np.trace(confusion)) / float(confusion.sum())
    return accuracy, confusion


def evaluate(model: Model, examples: list[LabeledExample]):
    """(accuracy, confusion matrix) over the given examples."""
    if not examples:
        raise EmptyEvalSet("no examples to evaluate")
    feats, labels = [], []
    for ex in examples:
        x, y = featurize(ex)
        feats.append(x)
        labels.append(y)
    return accuracy_and_confusion(model, feats, labels)


def train(config: TrainConfig,
          stop_at_val_accuracy: float | None = None) -> TrainResult:
    """Run the full loop: scan, featurize, fit, keep the best checkpoint.

    ``stop_at_val_accuracy`` ends training early once validation accuracy
    reaches the threshold (the epoch still completes).
    """
    examples = scan_dataset(config.dataset_root, config.val_fraction)
    train_examples = [e for e in examples if e.split == "train"]
    val_examples = [e for e in examples if e.split == "val"]
    if not train_examples or not val_examples:
        raise ConfigError(
            f"split produced {len(train_examples)} train / "
            f"{len(val_examples)} val examples; need both non-empty")

    skipped: list[str] = []
    t0 = time.time()
    train_x, train_y = _featurize_all(train_examples, skipped)
    val_x, val_y = _featurize_all(val_examples, skipped)
    if not train_x or not val_x:
        raise ConfigError("all examples in a split were skipped")
    log.info("featurized %d train / %d val clips in %.1fs (%d skipped)",
             len(train_x), len(val_x), time.time() - t0, len(skipped))

    rng_init = np.random.default_rng([config.seed, 0])
    rng_shuffle = np.random.default_rng([config.seed, 1])
    rng_dropout = np.random.default_rng([config.seed, 2])

    model = build_model(seed=rng_init)
    params = model.parameters()
    state = AdamState(params)

    best_acc = -1.0
    best_epoch = 0
    best_bytes = None
    history_loss: list[float] = []
    history_acc: list[float] = []

    for epoch in range(1, config.epochs + 1):
        t0 = time.time()
        order = rng_shuffle.permutation(len(train_x))
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            accum = [np.zeros(p.shape, dtype=np.float64) for p in params]
            for idx in batch:
                trace = model.forward(train_x[idx], training=True,
                                      rng=rng_dropout)
                loss, grad_logits, _ = softmax_cross_entropy(
                    trace.logits, train_y[idx])
                epoch_losses.append(loss)
                layer_grads = model.backward(trace, grad_logits)
                flat = [g for grads in layer_grads for g in grads]
                for a, g in zip(accum, flat):
                    a += g
            mean_grads = [a / len(batch) for a in accum]
            adam_step(params, mean_grads, state, lr=config.learning_rate)

        val_acc, _ = accuracy_and_confusion(model, val_x, val_y)
        history_loss.append(float(np.mean(epoch_losses)))
        history_acc.append(val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_bytes = save_checkpoint(model)
        log.info("epoch %d/%d: train loss %.4f, val accuracy %.4f (%.1fs)",
                 epoch, config.epochs, history_loss[-1], val_acc,
                 time.time() - t0)
        if stop_at_val_accuracy is not None \
                and best_acc >= stop_at_val_accuracy:
            log.info("early stop: val accuracy %.4f reached target %.4f",
                     best_acc, stop_at_val_accuracy)
            break

    if config.checkpoint_path is not None:
        config.checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
        config.checkpoint_path.write_bytes(best_bytes)
    return TrainResult(model=load_checkpoint(best_bytes),
                       train_loss=history_loss,
                       val_accuracy=history_acc,
                       skipped_files=skipped,
                       best_epoch=best_epoch)
