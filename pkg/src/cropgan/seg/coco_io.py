"""COCO results-file boundary: RLE/polygon decoding into instance records."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..data.annotations import rasterize
from ..data.types import Label, MaskAnnotation
from ..errors import DatasetError
from .records import InstanceRecord, mask_bbox


def rle_decode(rle: dict) -> np.ndarray:
    """Decode a COCO RLE segmentation (compressed string or raw counts list).

    Runs are column-major and start with the count of zeros.
    """
    h, w = rle["size"]
    counts = rle["counts"]
    if isinstance(counts, str):
        counts = _rle_string_to_counts(counts)
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    value = False
    for run in counts:
        if value:
            flat[pos:pos + run] = True
        pos += run
        value = not value
    if pos != h * w:
        raise DatasetError(f"RLE runs sum to {pos}, expected {h * w}")
    return flat.reshape((w, h)).T  # column-major storage


def rle_encode(mask: np.ndarray, compress: bool = False) -> dict:
    """Encode a boolean mask as COCO RLE (column-major runs)."""
    h, w = mask.shape
    flat = mask.T.reshape(-1)
    counts = []
    run_value = False
    run_len = 0
    for v in flat:
        if bool(v) == run_value:
            run_len += 1
        else:
            counts.append(run_len)
            run_value = bool(v)
            run_len = 1
    counts.append(run_len)
    if compress:
        return {"size": [h, w], "counts": _counts_to_rle_string(counts)}
    return {"size": [h, w], "counts": counts}


def _rle_string_to_counts(s: str) -> list[int]:
    """COCO's LEB128-style byte encoding with delta compression."""
    counts: list[int] = []
    i = 0
    while i < len(s):
        x = 0
        k = 0
        more = True
        while more:
            c = ord(s[i]) - 48
            x |= (c & 0x1F) << (5 * k)
            more = bool(c & 0x20)
            i += 1
            k += 1
            if not more and (c & 0x10):
                x |= -1 << (5 * k)
        if len(counts) > 2:
            x += counts[-2]
        counts.append(x)
    return counts


def _counts_to_rle_string(counts: list[int]) -> str:
    chars: list[str] = []
    for j, count in enumerate(counts):
        x = count
        if j > 2:
            x -= counts[j - 2]
        more = True
        while more:
            c = x & 0x1F
            x >>= 5
            more = (x != -1) if (c & 0x10) else (x != 0)
            if more:
                c |= 0x20
            chars.append(chr(c + 48))
    return "".join(chars)


def export_predictions(records: list[InstanceRecord],
                       image_numbers: dict[str, int],
                       category_numbers: dict[str, int],
                       compress: bool = True) -> list[dict]:
    """Serialize instance records in the engine's results format (RLE)."""
    out = []
    for r in records:
        out.append({
            "image_id": image_numbers[r.image_id],
            "category_id": category_numbers[r.class_label.value],
            "segmentation": rle_encode(r.mask, compress=compress),
            "bbox": list(r.bbox),
            "score": r.score,
        })
    return out


def import_predictions(doc: list | str | Path,
                       image_names: dict[int, str],
                       category_labels: dict[int, str],
                       image_sizes: dict[int, tuple[int, int]] | None = None
                       ) -> tuple[list[InstanceRecord], list[str]]:
    """Decode an engine results file into instance records.

    Accepts polygon or RLE segmentations. A record that cannot be decoded
    becomes an error entry and the rest proceed. Declared bboxes are
    checked against the mask's tight box within one pixel.
    """
    if isinstance(doc, (str, Path)):
        doc = json.loads(Path(doc).read_text())
    if not isinstance(doc, list):
        raise DatasetError("engine results must be a JSON list of detections")

    records: list[InstanceRecord] = []
    errors: list[str] = []
    for i, det in enumerate(doc):
        try:
            image_id = det["image_id"]
            name = image_names[image_id]
            label = Label(category_labels[det["category_id"]])
            seg = det["segmentation"]
            if isinstance(seg, dict):
                mask = rle_decode(seg)
            elif isinstance(seg, list) and seg:
                if image_sizes is None or image_id not in image_sizes:
                    raise DatasetError("polygon segmentation needs an image size")
                flat = seg[0]
                polygon = [(float(flat[j]), float(flat[j + 1])) for j in range(0, len(flat), 2)]
                ann = MaskAnnotation(image_id=name, class_label=label, polygon=polygon)
                mask = rasterize(ann, image_sizes[image_id])
            else:
                raise DatasetError(f"unsupported segmentation payload: {type(seg).__name__}")
            record = InstanceRecord(
                image_id=name, class_label=label, mask=mask,
                score=float(det.get("score", 1.0)),
            )
            declared = det.get("bbox")
            if declared is not None:
                tight = mask_bbox(mask)
                if max(abs(a - b) for a, b in zip(tight, declared)) > 1.0:
                    raise DatasetError(
                        f"declared bbox {declared} disagrees with mask box {tight}"
                    )
            records.append(record)
        except (DatasetError, KeyError, ValueError, IndexError) as exc:
            errors.append(f"detection {i}: {exc}")
    return records, errors
