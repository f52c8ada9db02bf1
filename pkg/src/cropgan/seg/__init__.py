from .records import InstanceRecord, MatchResult, mask_bbox
from .metrics import bbox_iou, dice, mask_iou
from .matching import (
    COCO_AP_THRESHOLDS,
    ap_report,
    average_precision,
    dataset_dice,
    match,
)
from .coco_io import export_predictions, import_predictions, rle_decode, rle_encode
from .engine_config import SegEngineConfig, emit_engine_config, iteration_count
from .predictor import predict_blobs

__all__ = [
    "COCO_AP_THRESHOLDS",
    "InstanceRecord",
    "MatchResult",
    "SegEngineConfig",
    "ap_report",
    "average_precision",
    "bbox_iou",
    "dataset_dice",
    "dice",
    "emit_engine_config",
    "export_predictions",
    "import_predictions",
    "iteration_count",
    "mask_bbox",
    "mask_iou",
    "match",
    "predict_blobs",
    "rle_decode",
    "rle_encode",
]
