"""Adapter benchmarking over a labeled train/test split."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import DatasetError
from .adapters import ClassifierAdapter, ClfTrainConfig
from .metrics import ConfusionMatrix, accuracy, confusion, log_loss, precision_recall_f1

log = logging.getLogger(__name__)


@dataclass
class ClassificationDataset:
    train_images: np.ndarray
    train_labels: np.ndarray
    test_images: np.ndarray
    test_labels: np.ndarray
    class_names: list[str]

    def __post_init__(self):
        if len(self.train_images) == 0 or len(self.test_images) == 0:
            raise DatasetError("benchmark needs non-empty train and test splits")


@dataclass
class ClassificationReport:
    name: str
    status: str = "ok"
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    log_loss: float = 0.0
    averaging: str = "macro"
    eval_set: str = "test"
    per_class: dict = field(default_factory=dict)
    confusion: list = field(default_factory=list)
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "model": self.name,
            "status": self.status,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "log_loss": self.log_loss,
            "averaging": self.averaging,
            "eval_set": self.eval_set,
            "per_class": self.per_class,
            "confusion": self.confusion,
            "error": self.error,
        }


def evaluate_predictions(name: str, probs: np.ndarray, labels: np.ndarray,
                         class_names: list[str], averaging: str = "macro",
                         eval_set: str = "test") -> tuple[ClassificationReport, ConfusionMatrix]:
    cm = confusion(probs, labels, class_names=class_names)
    precision, recall, f1 = precision_recall_f1(cm, averaging=averaging)
    per_class = {}
    for k, cls in enumerate(class_names):
        p, r, f = precision_recall_f1(cm, averaging="binary", positive_class=k)
        per_class[cls] = {"precision": p, "recall": r, "f1": f}
    report = ClassificationReport(
        name=name,
        accuracy=accuracy(cm),
        precision=precision,
        recall=recall,
        f1=f1,
        log_loss=log_loss(probs, labels),
        averaging=averaging,
        eval_set=eval_set,
        per_class=per_class,
        confusion=cm.counts.tolist(),
    )
    return report, cm


def benchmark(adapters: list[ClassifierAdapter], dataset: ClassificationDataset,
              cfg: ClfTrainConfig, averaging: str = "macro",
              eval_set: str = "test") -> list[ClassificationReport]:
    """Train and evaluate each adapter in input order; one failure does not stop the run."""
    reports: list[ClassificationReport] = []
    for adapter in adapters:
        try:
            adapter.train(dataset.train_images, dataset.train_labels, cfg)
            probs = adapter.predict_proba(dataset.test_images)
            report, _ = evaluate_predictions(
                adapter.name, probs, dataset.test_labels,
                dataset.class_names, averaging, eval_set)
        except Exception as exc:  # isolate adapter failures
            log.warning("adapter %s failed: %s", adapter.name, exc)
            report = ClassificationReport(name=adapter.name, status="failed", error=str(exc))
        reports.append(report)
    return reports
