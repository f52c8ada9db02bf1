"""Overlap metrics for masks and boxes."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two boolean masks.

    Two empty masks count as a perfect match (1.0); one empty mask gives 0.
    """
    if a.shape != b.shape:
        raise ShapeError(f"mask shapes differ: {a.shape} vs {b.shape}")
    a = a.astype(bool)
    b = b.astype(bool)
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return int(np.logical_and(a, b).sum()) / union


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Dice coefficient 2|a n b| / (|a| + |b|); both-empty convention is 1.0."""
    if a.shape != b.shape:
        raise ShapeError(f"mask shapes differ: {a.shape} vs {b.shape}")
    a = a.astype(bool)
    b = b.astype(bool)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def bbox_iou(a: tuple[float, float, float, float],
             b: tuple[float, float, float, float]) -> float:
    """Rectangle IoU for (x, y, w, h) boxes; zero-area boxes give 0."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    if aw < 0 or ah < 0 or bw < 0 or bh < 0:
        raise ShapeError("boxes must have non-negative width and height")
    area_a = aw * ah
    area_b = bw * bh
    if area_a == 0.0 or area_b == 0.0:
        return 0.0
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    return inter / (area_a + area_b - inter)
