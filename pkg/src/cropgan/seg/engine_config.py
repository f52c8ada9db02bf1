"""Config and launch-script emission for the external segmentation engine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import DatasetError

VALID_BACKBONES = ("resnet50", "resnet101", "resnext101")

_BASE_CONFIGS = {
    "resnet50": "COCO-InstanceSegmentation/mask_rcnn_R_50_FPN_3x.yaml",
    "resnet101": "COCO-InstanceSegmentation/mask_rcnn_R_101_FPN_3x.yaml",
    "resnext101": "COCO-InstanceSegmentation/mask_rcnn_X_101_32x8d_FPN_3x.yaml",
}


@dataclass
class SegEngineConfig:
    backbone: str = "resnext101"
    learning_rate: float = 1e-3
    batch_size: int = 8
    epochs: int = 25
    optimizer: str = "SGD"
    train_json: str = "coco_train.json"
    test_json: str = "coco_test.json"
    image_root: str = "images"
    num_classes: int = 2
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.backbone not in VALID_BACKBONES:
            raise DatasetError(
                f"unknown backbone {self.backbone!r}; valid: {list(VALID_BACKBONES)}"
            )
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise DatasetError("learning_rate, batch_size and epochs must be positive")


def iteration_count(epochs: int, n_train: int, batch_size: int) -> int:
    return epochs * math.ceil(n_train / batch_size)


def emit_engine_config(cfg: SegEngineConfig, n_train: int, out_dir: str | Path) -> dict:
    """Write the engine's YAML config plus a launch script.

    The iteration budget converts the epoch count: epochs * ceil(n/batch).
    Returns paths of the written files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_path = Path(cfg.train_json)
    if not train_path.exists():
        raise DatasetError(
            f"dataset export {cfg.train_json} not found; run the COCO export first"
        )
    max_iter = iteration_count(cfg.epochs, n_train, cfg.batch_size)
    doc = {
        "_BASE_": _BASE_CONFIGS[cfg.backbone],
        "MODEL": {
            "MASK_ON": True,
            "ROI_HEADS": {"NUM_CLASSES": cfg.num_classes},
        },
        "SOLVER": {
            "BASE_LR": cfg.learning_rate,
            "IMS_PER_BATCH": cfg.batch_size,
            "MAX_ITER": max_iter,
            "OPTIMIZER": cfg.optimizer,
        },
        "DATASETS": {
            "TRAIN": ["crop_disease_train"],
            "TEST": ["crop_disease_test"],
        },
        "INPUT": {"MASK_FORMAT": "polygon"},
    }
    doc.update(cfg.extras)
    config_path = out_dir / f"mask_rcnn_{cfg.backbone}.yaml"
    config_path.write_text(yaml.safe_dump(doc, sort_keys=True))

    script_path = out_dir / f"train_{cfg.backbone}.sh"
    script_path.write_text(
        "#!/bin/sh\n"
        "# register the COCO exports, then fine-tune and dump predictions\n"
        f"python -m detectron2.tools.train_net \\\n"
        f"  --config-file {config_path.name} \\\n"
        f"  DATASETS.TRAIN_JSON {cfg.train_json} \\\n"
        f"  DATASETS.TEST_JSON {cfg.test_json} \\\n"
        f"  INPUT.ROOT {cfg.image_root} \\\n"
        f"  OUTPUT.DIR output_{cfg.backbone}\n"
    )
    script_path.chmod(0o755)
    return {"config": str(config_path), "script": str(script_path), "max_iter": max_iter}
