"""Desk-scale stand-in predictor: colour-threshold blob detection.

The external engine owns real segmentation; this detector exists so the
evaluation path can run end to end on the synthetic corpus without it.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..data.types import DISEASE_LABELS, ImageSample, Label
from .records import InstanceRecord

# blotch tones are far from the tuber base colour; distance thresholds
# picked loosely per disease
_TARGET_RGB = {
    Label.BLACK_SCURF: np.array([46.0, 36.0, 30.0]),
    Label.COMMON_SCAB: np.array([196.0, 156.0, 92.0]),
}
_DISTANCE_THRESHOLD = 48.0
_MIN_PIXELS = 12


def predict_blobs(sample: ImageSample, labels=DISEASE_LABELS) -> list[InstanceRecord]:
    """Detect connected colour blobs near each disease tone.

    The detection score is the mean colour proximity inside the blob, so
    cleaner blobs rank higher; deterministic by construction.
    """
    pixels = sample.require_pixels().astype(np.float64)
    records: list[InstanceRecord] = []
    for label in labels:
        dist = np.linalg.norm(pixels - _TARGET_RGB[label], axis=2)
        candidates = dist < _DISTANCE_THRESHOLD
        blobs, n_blobs = ndimage.label(candidates)
        for b in range(1, n_blobs + 1):
            mask = blobs == b
            if int(mask.sum()) < _MIN_PIXELS:
                continue
            proximity = 1.0 - float(dist[mask].mean()) / _DISTANCE_THRESHOLD
            records.append(
                InstanceRecord(
                    image_id=sample.id,
                    class_label=label,
                    mask=mask,
                    score=min(max(proximity, 0.01), 0.99),
                )
            )
    return records
