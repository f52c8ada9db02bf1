"""Classification metrics computed from confusion matrices and probabilities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from ..genmetrics.inception import validate_prob_matrix

LOG_LOSS_EPS = 1e-15


@dataclass
class ConfusionMatrix:
    """C x C counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray
    class_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ShapeError(f"confusion matrix must be square, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ShapeError("confusion matrix entries must be non-negative")
        if not self.class_names:
            self.class_names = [str(i) for i in range(self.counts.shape[0])]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(probs: np.ndarray, labels: list[int] | np.ndarray,
              class_names: list[str] | None = None) -> ConfusionMatrix:
    """Tally argmax predictions against true labels.

    Argmax ties break toward the lowest class index.
    """
    probs = validate_prob_matrix(probs)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != probs.shape[0]:
        raise ShapeError(f"{labels.shape[0]} labels for {probs.shape[0]} predictions")
    n_classes = probs.shape[1]
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= n_classes:
        raise ShapeError(f"labels outside class range [0, {n_classes})")
    preds = probs.argmax(axis=1)  # numpy argmax takes the first maximum
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(labels, preds):
        counts[t, p] += 1
    return ConfusionMatrix(counts=counts, class_names=class_names or [])


def accuracy(cm: ConfusionMatrix) -> float:
    """Correctly classified fraction: trace over total."""
    if cm.total == 0:
        raise ShapeError("confusion matrix is empty")
    return float(np.trace(cm.counts)) / cm.total


def _per_class_tp_fp_fn(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tp = np.diag(counts).astype(np.float64)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    return tp, fp, fn


def precision_recall_f1(cm: ConfusionMatrix, averaging: str = "macro",
                        positive_class: int | None = None
                        ) -> tuple[float, float, float]:
    """Precision, recall and F1 under macro, micro or binary averaging.

    A class with no predicted positives contributes precision 0. Macro F1
    is the harmonic mean of the macro-averaged precision and recall.
    """
    if cm.total == 0:
        raise ShapeError("confusion matrix is empty")
    tp, fp, fn = _per_class_tp_fp_fn(cm.counts)

    if averaging == "binary":
        if positive_class is None:
            raise ShapeError("binary averaging needs a positive_class index")
        k = positive_class
        precision = tp[k] / (tp[k] + fp[k]) if tp[k] + fp[k] > 0 else 0.0
        recall = tp[k] / (tp[k] + fn[k]) if tp[k] + fn[k] > 0 else 0.0
    elif averaging == "micro":
        precision = tp.sum() / (tp.sum() + fp.sum()) if tp.sum() + fp.sum() > 0 else 0.0
        recall = tp.sum() / (tp.sum() + fn.sum()) if tp.sum() + fn.sum() > 0 else 0.0
    elif averaging == "macro":
        per_p = np.where(tp + fp > 0, tp / np.where(tp + fp > 0, tp + fp, 1), 0.0)
        per_r = np.where(tp + fn > 0, tp / np.where(tp + fn > 0, tp + fn, 1), 0.0)
        precision = float(per_p.mean())
        recall = float(per_r.mean())
    else:
        raise ShapeError(f"unknown averaging {averaging!r}; use macro, micro or binary")

    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return float(precision), float(recall), float(f1)


def log_loss(probs: np.ndarray, labels: list[int] | np.ndarray) -> float:
    """Mean negative log probability of the true class, eps-clamped."""
    probs = validate_prob_matrix(probs)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != probs.shape[0]:
        raise ShapeError(f"{labels.shape[0]} labels for {probs.shape[0]} predictions")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= probs.shape[1]:
        raise ShapeError("labels outside class range")
    p_true = np.clip(probs[np.arange(len(labels)), labels], LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS)
    return float(-np.log(p_true).mean())
