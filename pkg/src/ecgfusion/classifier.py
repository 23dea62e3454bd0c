"""Multinomial softmax classifier over flattened fused images.

A deliberately small, fully gradient-checkable reference model trained with
mini-batch SGD (momentum plus L2 weight decay) and early stopping on
validation loss. It stands in for a deep feature extractor at desk scale;
the tensor stores exist for training larger models externally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SoftmaxModel:
    """Linear class scores: weights (n_classes, n_features) plus bias."""

    weights: np.ndarray
    bias: np.ndarray
    feature_side: int
    class_names: dict[int, str] | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(f"bias shape {self.bias.shape} does not match "
                             f"{self.weights.shape[0]} classes")

    @classmethod
    def zeros(cls, n_classes: int, n_features: int, feature_side: int,
              class_names: dict[int, str] | None = None) -> "SoftmaxModel":
        return cls(np.zeros((n_classes, n_features)), np.zeros(n_classes),
                   feature_side, class_names)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


@dataclass
class TrainConfig:
    """SGD hyperparameters; momentum and L2 follow the reference settings."""

    learning_rate: float = 0.01
    momentum: float = 0.9
    l2: float = 0.004
    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")


def _check_features(model: SoftmaxModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise ValueError(f"expected features of shape (n, {model.n_features}), "
                         f"got {features.shape}")
    return features


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def forward(model: SoftmaxModel, features: np.ndarray) -> np.ndarray:
    """Class probability rows, stabilized by max-subtraction."""
    features = _check_features(model, features)
    return np.exp(_log_softmax(features @ model.weights.T + model.bias))


def loss_and_grad(model: SoftmaxModel, features: np.ndarray, labels: np.ndarray,
                  l2: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus (l2/2)*||W||^2 and its analytic gradients.

    Returns (loss, weight gradient, bias gradient); the bias carries no L2
    penalty.
    """
    features = _check_features(model, features)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (features.shape[0],):
        raise ValueError(f"{features.shape[0]} rows but {labels.size} labels")
    if labels.size == 0:
        raise ValueError("empty batch")
    if labels.min() < 0 or labels.max() >= model.n_classes:
        raise ValueError(f"labels must lie in [0, {model.n_classes}), "
                         f"got range [{labels.min()}, {labels.max()}]")
    n = features.shape[0]
    log_probs = _log_softmax(features @ model.weights.T + model.bias)
    loss = -log_probs[np.arange(n), labels].mean()
    loss += 0.5 * l2 * float((model.weights ** 2).sum())

    delta = np.exp(log_probs)
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    grad_w = delta.T @ features + l2 * model.weights
    grad_b = delta.sum(axis=0)
    return float(loss), grad_w, grad_b


def predict(model: SoftmaxModel, features: np.ndarray) -> np.ndarray:
    """Argmax class per row; ties break toward the lowest class id."""
    features = _check_features(model, features)
    logits = features @ model.weights.T + model.bias
    return np.argmax(logits, axis=1)


def stratified_split(labels: np.ndarray, fraction: float,
                     seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-class split into (keep, held_out) index arrays.

    Each class contributes ceil(fraction * count) indices to the held-out
    side, so no nonempty class disappears from either side of a 10% carve.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    held = []
    for cid in np.unique(labels):
        idx = np.flatnonzero(labels == cid)
        take = int(np.ceil(fraction * idx.size))
        take = min(take, idx.size - 1) if idx.size > 1 else idx.size
        held.append(rng.permutation(idx)[:take])
    held_out = np.sort(np.concatenate(held))
    keep = np.setdiff1d(np.arange(labels.size), held_out)
    return keep, held_out


def train(model: SoftmaxModel, train_features: np.ndarray, train_labels: np.ndarray,
          val_features: np.ndarray, val_labels: np.ndarray,
          config: TrainConfig) -> tuple[SoftmaxModel, dict[str, list[float]]]:
    """Mini-batch SGD with momentum; returns the best-validation-loss model.

    Velocity update: v <- momentum * v - learning_rate * grad; param += v.
    Stops after ``patience`` epochs without validation improvement or at
    ``max_epochs``. The shuffle stream and reduction order are fixed by the
    seed, so the loss history is reproducible bit for bit.
    """
    train_features = _check_features(model, train_features)
    val_features = _check_features(model, val_features)
    if train_features.shape[0] == 0:
        raise ValueError("empty training store")
    if val_features.shape[0] == 0:
        raise ValueError("empty validation store")

    work = SoftmaxModel(model.weights.copy(), model.bias.copy(),
                        model.feature_side, model.class_names)
    vel_w = np.zeros_like(work.weights)
    vel_b = np.zeros_like(work.bias)
    best_loss = np.inf
    best_w, best_b = work.weights.copy(), work.bias.copy()
    history: dict[str, list[float]] = {"train_loss": [], "val_loss": []}
    stale = 0
    rng = np.random.default_rng(config.seed)
    n = train_features.shape[0]

    for _ in range(config.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            _, grad_w, grad_b = loss_and_grad(work, train_features[idx],
                                              train_labels[idx], config.l2)
            vel_w = config.momentum * vel_w - config.learning_rate * grad_w
            vel_b = config.momentum * vel_b - config.learning_rate * grad_b
            work.weights += vel_w
            work.bias += vel_b
        if not (np.isfinite(work.weights).all() and np.isfinite(work.bias).all()):
            raise ValueError("training diverged: non-finite parameters "
                             "(reduce learning_rate)")
        train_loss, _, _ = loss_and_grad(work, train_features, train_labels, config.l2)
        val_loss, _, _ = loss_and_grad(work, val_features, val_labels, config.l2)
        history["train_loss"].append(train_loss)
        history["val_loss"].append(val_loss)
        if val_loss < best_loss:
            best_loss = val_loss
            best_w, best_b = work.weights.copy(), work.bias.copy()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    return SoftmaxModel(best_w, best_b, model.feature_side, model.class_names), history
