"""Greedy instance matching and average precision."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from ..errors import DatasetError
from .metrics import bbox_iou, dice, mask_iou
from .records import InstanceRecord, MatchResult

COCO_AP_THRESHOLDS = tuple(np.round(np.arange(0.5, 0.96, 0.05), 2))


def _pair_iou(pred: InstanceRecord, gt: InstanceRecord, iou_kind: str) -> float:
    if iou_kind == "mask":
        return mask_iou(pred.mask, gt.mask)
    if iou_kind == "bbox":
        return bbox_iou(pred.bbox, gt.bbox)
    raise DatasetError(f"unknown iou_kind {iou_kind!r}; use 'mask' or 'bbox'")


def match(preds: list[InstanceRecord], gts: list[InstanceRecord],
          iou_kind: str = "mask", threshold: float = 0.5) -> MatchResult:
    """Greedily match predictions to ground truths on one image and class.

    Predictions are visited in descending score (input order on ties);
    each takes the unmatched ground truth of highest IoU, provided that
    IoU reaches the threshold.
    """
    order = np.argsort([-p.score for p in preds], kind="stable")
    gt_taken = [False] * len(gts)
    result = MatchResult(threshold=threshold)
    for pi in order:
        best_gi, best_iou = -1, 0.0
        for gi, gt in enumerate(gts):
            if gt_taken[gi]:
                continue
            iou = _pair_iou(preds[pi], gt, iou_kind)
            if iou >= threshold and iou > best_iou:
                best_gi, best_iou = gi, iou
        if best_gi >= 0:
            gt_taken[best_gi] = True
            result.pairs.append((int(pi), best_gi, best_iou))
        else:
            result.unmatched_preds.append(int(pi))
    result.unmatched_gts = [gi for gi, taken in enumerate(gt_taken) if not taken]
    return result


def _group(records: list[InstanceRecord]) -> dict[tuple[str, str], list[InstanceRecord]]:
    groups: dict[tuple[str, str], list[InstanceRecord]] = defaultdict(list)
    for r in records:
        groups[(r.image_id, r.class_label.value)].append(r)
    return groups


def _class_pr_points(preds: list[InstanceRecord], gts: list[InstanceRecord],
                     iou_kind: str, threshold: float) -> dict[str, tuple[list, int]]:
    """Pool (score, is_tp) flags per class across all images."""
    pred_groups = _group(preds)
    gt_groups = _group(gts)
    classes = sorted({g.class_label.value for g in gts})
    pooled: dict[str, tuple[list, int]] = {}
    for cls in classes:
        entries: list[tuple[float, bool]] = []
        n_gt = 0
        keys = set(pred_groups) | set(gt_groups)
        for key in sorted(keys):
            if key[1] != cls:
                continue
            img_preds = pred_groups.get(key, [])
            img_gts = gt_groups.get(key, [])
            n_gt += len(img_gts)
            res = match(img_preds, img_gts, iou_kind, threshold)
            matched = {pi for pi, _, _ in res.pairs}
            for pi, p in enumerate(img_preds):
                entries.append((p.score, pi in matched))
        pooled[cls] = (entries, n_gt)
    return pooled


def _ap_from_entries(entries: list[tuple[float, bool]], n_gt: int,
                     interpolation: str) -> float:
    if n_gt == 0:
        return float("nan")
    if not entries:
        return 0.0
    order = np.argsort([-s for s, _ in entries], kind="stable")
    tp = np.array([entries[i][1] for i in order], dtype=np.float64)
    fp = 1.0 - tp
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(fp)
    recall = cum_tp / n_gt
    precision = cum_tp / (cum_tp + cum_fp)
    # monotone envelope from the right
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    if interpolation == "coco101":
        thresholds = np.linspace(0.0, 1.0, 101)
        idx = np.searchsorted(recall, thresholds, side="left")
        q = np.where(idx < len(envelope), envelope[np.minimum(idx, len(envelope) - 1)], 0.0)
        return float(q.mean())
    if interpolation == "exact":
        prev_r = 0.0
        area = 0.0
        for r, p in zip(recall, envelope):
            area += (r - prev_r) * p
            prev_r = r
        return float(area)
    raise DatasetError(f"unknown interpolation {interpolation!r}; use 'coco101' or 'exact'")


def average_precision(preds: list[InstanceRecord], gts: list[InstanceRecord],
                      iou_kind: str = "mask", threshold: float = 0.5,
                      interpolation: str = "coco101") -> float:
    """AP at one IoU threshold: per class, then mean over classes with truth."""
    if not gts:
        raise DatasetError("average_precision needs at least one ground-truth instance")
    pooled = _class_pr_points(preds, gts, iou_kind, threshold)
    aps = [_ap_from_entries(entries, n_gt, interpolation)
           for entries, n_gt in pooled.values() if n_gt > 0]
    return float(np.mean(aps))


def ap_report(preds: list[InstanceRecord], gts: list[InstanceRecord],
              iou_kind: str = "mask", interpolation: str = "coco101") -> dict:
    """Headline AP (mean over 0.50:0.05:0.95) plus AP@0.5 and AP@0.75."""
    per_threshold = {
        t: average_precision(preds, gts, iou_kind, t, interpolation)
        for t in COCO_AP_THRESHOLDS
    }
    return {
        "ap": float(np.mean(list(per_threshold.values()))),
        "ap50": per_threshold[0.5],
        "ap75": per_threshold[0.75],
    }


def dataset_dice(preds: list[InstanceRecord], gts: list[InstanceRecord],
                 threshold: float = 0.5) -> float:
    """Mean instance Dice over matched pairs; each missed gt contributes 0.

    Matching uses mask IoU at the given threshold; unmatched predictions
    do not enter the mean (the denominator is the ground-truth count).
    """
    if not gts:
        raise DatasetError("dataset_dice needs at least one ground-truth instance")
    pred_groups = _group(preds)
    gt_groups = _group(gts)
    total = 0.0
    n = 0
    for key in sorted(gt_groups):
        img_preds = pred_groups.get(key, [])
        img_gts = gt_groups[key]
        res = match(img_preds, img_gts, "mask", threshold)
        for pi, gi, _ in res.pairs:
            total += dice(img_preds[pi].mask, img_gts[gi].mask)
        n += len(img_gts)
    return total / n
