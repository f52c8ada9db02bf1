"""Instance records shared by matching, AP and the engine boundary."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DatasetError
from ..data.types import Label


def mask_bbox(mask: np.ndarray) -> tuple[float, float, float, float]:
    """Tight (x, y, w, h) box around the set pixels of a mask."""
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise DatasetError("cannot take bbox of an empty mask")
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())
    return float(x0), float(y0), float(x1 - x0 + 1), float(y1 - y0 + 1)


@dataclass
class InstanceRecord:
    """One predicted or ground-truth instance on one image."""

    image_id: str
    class_label: Label
    mask: np.ndarray
    score: float = 1.0
    bbox: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.mask.dtype != bool:
            self.mask = self.mask.astype(bool)
        if not self.mask.any():
            raise DatasetError(f"instance on {self.image_id!r} has an empty mask")
        if not 0.0 <= self.score <= 1.0:
            raise DatasetError(f"instance score {self.score} outside [0, 1]")
        if self.bbox is None:
            self.bbox = mask_bbox(self.mask)


@dataclass
class MatchResult:
    """Injective partial matching between predictions and ground truths."""

    pairs: list[tuple[int, int, float]] = field(default_factory=list)
    unmatched_preds: list[int] = field(default_factory=list)
    unmatched_gts: list[int] = field(default_factory=list)
    threshold: float = 0.5
