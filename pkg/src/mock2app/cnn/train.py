"""SGDM training with checkpoint-based early stopping.

Every ``val_interval`` epochs (and at the final epoch) validation top-1
accuracy is measured and the weights snapshotted; training stops early
once accuracy has decreased for more than ``patience`` consecutive
checkpoints, and the best snapshot wins either way.  All randomness
(init is the caller's, shuffling is ours) comes from the seeded
generator, so identical runs produce identical weights and logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ConfigurationError
from .layers import softmax_cross_entropy
from .model import CnnModel


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    lr_schedule: tuple[tuple[int, float], ...] = ((50, 1e-5), (75, 1e-6))
    momentum: float = 0.9
    batch_size: int = 64
    val_interval: int = 5
    patience: int = 2
    max_epochs: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ConfigurationError("learning rate and batch size must be positive")
        if self.val_interval < 1 or self.max_epochs < 1:
            raise ConfigurationError("val_interval and max_epochs must be >= 1")

    def lr_at(self, epoch: int) -> float:
        lr = self.learning_rate
        for boundary, value in sorted(self.lr_schedule):
            if epoch > boundary:
                lr = value
        return lr


@dataclass
class TrainLog:
    epochs: list[dict] = field(default_factory=list)
    checkpoints: list[dict] = field(default_factory=list)
    stopped_early: bool = False
    best_epoch: int = 0
    best_accuracy: float = 0.0

    def as_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "checkpoints": self.checkpoints,
            "stopped_early": self.stopped_early,
            "best_epoch": self.best_epoch,
            "best_accuracy": self.best_accuracy,
        }


@dataclass(frozen=True)
class Dataset:
    """Letterboxed uint8 NCHW crops plus integer class labels."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.images.ndim != 4 or self.images.dtype != np.uint8:
            raise ConfigurationError("images must be uint8 NCHW")
        if len(self.images) != len(self.labels):
            raise ConfigurationError("images/labels length mismatch")

    def __len__(self) -> int:
        return len(self.images)


def dataset_from_crops(samples, input_size: int, classes) -> Dataset:
    """Letterbox (crop, label) pairs into a training-ready Dataset."""
    from ..imaging import letterbox
    index = {cls: i for i, cls in enumerate(classes)}
    images = np.empty((len(samples), 3, input_size, input_size), dtype=np.uint8)
    labels = np.empty(len(samples), dtype=np.int64)
    for i, (crop, label) in enumerate(samples):
        images[i] = letterbox(crop, input_size).transpose(2, 0, 1)
        labels[i] = index[label]
    return Dataset(images=images, labels=labels)


def _batch_input(images: np.ndarray) -> np.ndarray:
    return images.astype(np.float32) / 255.0


def evaluate_accuracy(model: CnnModel, data: Dataset, batch_size: int = 128) -> float:
    if len(data) == 0:
        raise ConfigurationError("cannot evaluate on an empty split")
    hits = 0
    for start in range(0, len(data), batch_size):
        chunk = data.images[start:start + batch_size]
        pred = model.predict_batch(_batch_input(chunk))
        hits += int((pred == data.labels[start:start + batch_size]).sum())
    return hits / len(data)


def train(model: CnnModel, train_data: Dataset, valid_data: Dataset,
          cfg: TrainConfig) -> TrainLog:
    """Optimize the model in place; returns the log. Best snapshot wins."""
    if len(train_data) == 0 or len(valid_data) == 0:
        raise ConfigurationError("train and validation splits must be non-empty")
    rng = np.random.default_rng(cfg.seed)
    params = model.params()
    velocity = [np.zeros_like(p) for p in params]
    log = TrainLog()

    best: list[np.ndarray] | None = None
    prev_acc: float | None = None
    decreases = 0

    for epoch in range(1, cfg.max_epochs + 1):
        lr = cfg.lr_at(epoch)
        order = rng.permutation(len(train_data))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            x = _batch_input(train_data.images[idx])
            logits = model.forward(x, train=True)
            loss, _, dlogits = softmax_cross_entropy(logits, train_data.labels[idx])
            model.backward(dlogits)
            for p, v, g in zip(params, velocity, model.grads()):
                v *= cfg.momentum
                v -= lr * g
                p += v
            losses.append(loss)
        log.epochs.append({"epoch": epoch, "loss": float(np.mean(losses)),
                           "lr": lr})

        if epoch % cfg.val_interval == 0 or epoch == cfg.max_epochs:
            acc = evaluate_accuracy(model, valid_data)
            log.checkpoints.append({"epoch": epoch, "accuracy": acc})
            if best is None or acc > log.best_accuracy:
                log.best_accuracy = acc
                log.best_epoch = epoch
                best = [p.copy() for p in params]
            if prev_acc is not None and acc < prev_acc:
                decreases += 1
            else:
                decreases = 0
            prev_acc = acc
            if decreases > cfg.patience:
                log.stopped_early = True
                break

    if best is not None:
        model.set_params(best)
    model.meta.update({
        "trained_epochs": log.epochs[-1]["epoch"] if log.epochs else 0,
        "best_epoch": log.best_epoch,
        "valid_accuracy": log.best_accuracy,
        "seed": cfg.seed,
    })
    return log
