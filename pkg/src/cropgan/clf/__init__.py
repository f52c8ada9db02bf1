from .metrics import (
    ConfusionMatrix,
    accuracy,
    confusion,
    log_loss,
    precision_recall_f1,
)
from .adapters import (
    ClassifierAdapter,
    ClfTrainConfig,
    ConstantPriorAdapter,
    LinearAdapter,
    TinyCnnAdapter,
    TorchvisionAdapter,
    make_adapter,
)
from .benchmark import (
    ClassificationDataset,
    ClassificationReport,
    benchmark,
    evaluate_predictions,
)

__all__ = [
    "ClassificationDataset",
    "ClassificationReport",
    "ClassifierAdapter",
    "ClfTrainConfig",
    "ConfusionMatrix",
    "ConstantPriorAdapter",
    "LinearAdapter",
    "TinyCnnAdapter",
    "TorchvisionAdapter",
    "accuracy",
    "benchmark",
    "confusion",
    "evaluate_predictions",
    "log_loss",
    "make_adapter",
    "precision_recall_f1",
]
