"""Polygon annotations: VGG-annotator import, rasterization, COCO export."""

from __future__ import annotations

import logging

import numpy as np

from ..errors import DatasetError
from .types import DatasetManifest, Label, MaskAnnotation

log = logging.getLogger(__name__)


def polygon_area(polygon: list[tuple[float, float]]) -> float:
    """Shoelace area (absolute)."""
    xs = np.array([p[0] for p in polygon], dtype=np.float64)
    ys = np.array([p[1] for p in polygon], dtype=np.float64)
    return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))


def rasterize(ann: MaskAnnotation, size: tuple[int, int]) -> np.ndarray:
    """Rasterize a polygon annotation onto an H x W boolean grid.

    A pixel is set iff its centre (col + 0.5, row + 0.5) lies inside the
    polygon under the even-odd rule (ray-crossing parity).
    """
    if ann.polygon is None:
        if ann.bitmask is None:
            raise DatasetError("annotation has no polygon to rasterize")
        return ann.bitmask.astype(bool)
    if polygon_area(ann.polygon) <= 0.0:
        raise DatasetError(f"zero-area polygon on image {ann.image_id!r}")

    h, w = size
    px = np.arange(w, dtype=np.float64) + 0.5
    py = np.arange(h, dtype=np.float64) + 0.5
    PX, PY = np.meshgrid(px, py)
    inside = np.zeros((h, w), dtype=bool)
    pts = ann.polygon
    n = len(pts)
    for i in range(n):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % n]
        if y1 == y2:
            continue
        straddles = (y1 > PY) != (y2 > PY)
        x_at = x1 + (PY - y1) * (x2 - x1) / (y2 - y1)
        inside ^= straddles & (PX < x_at)
    return inside


def import_vgg_annotations(doc: dict) -> list[MaskAnnotation]:
    """Read polygon regions from a VGG Image Annotator project export.

    Non-polygon regions are skipped with a warning; a region missing its
    class attribute is an error naming the offending region.
    """
    via = doc.get("_via_img_metadata", doc)
    annotations: list[MaskAnnotation] = []
    for key, entry in via.items():
        if not isinstance(entry, dict) or "regions" not in entry:
            continue
        filename = entry.get("filename", key)
        image_id = filename.rsplit(".", 1)[0]
        regions = entry["regions"]
        if isinstance(regions, dict):  # older VIA exports index regions by string keys
            regions = [regions[k] for k in sorted(regions)]
        for idx, region in enumerate(regions):
            shape = region.get("shape_attributes", {})
            if shape.get("name") != "polygon":
                log.warning("skipping non-polygon region %d on %s (type=%r)",
                            idx, filename, shape.get("name"))
                continue
            xs, ys = shape.get("all_points_x", []), shape.get("all_points_y", [])
            if len(xs) != len(ys) or len(xs) < 3:
                raise DatasetError(
                    f"region {idx} on {filename!r}: polygon needs >= 3 vertices, got {len(xs)}"
                )
            attrs = region.get("region_attributes", {})
            cls = attrs.get("class") or attrs.get("label") or attrs.get("disease")
            if not cls:
                raise DatasetError(f"region {idx} on {filename!r} has no class attribute")
            annotations.append(
                MaskAnnotation(
                    image_id=image_id,
                    class_label=Label(cls),
                    polygon=[(float(x), float(y)) for x, y in zip(xs, ys)],
                )
            )
    return annotations


def polygon_bbox(polygon: list[tuple[float, float]]) -> list[float]:
    """Tight [x, y, w, h] box of a polygon."""
    xs = [p[0] for p in polygon]
    ys = [p[1] for p in polygon]
    return [min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys)]


def export_coco(manifest: DatasetManifest, annotations: list[MaskAnnotation],
                image_sizes: dict[str, tuple[int, int]] | None = None) -> dict:
    """Build a COCO instance-format document for the external engine.

    Image and annotation ids are contiguous from 1; area is the rasterized
    pixel count and bbox the polygon's tight box.
    """
    by_id = manifest.by_id()
    for ann in annotations:
        if ann.image_id not in by_id:
            raise DatasetError(f"annotation references unknown image id {ann.image_id!r}")

    def size_of(sid: str) -> tuple[int, int]:
        if image_sizes and sid in image_sizes:
            return image_sizes[sid]
        return by_id[sid].require_pixels().shape[:2]

    used_ids = sorted({ann.image_id for ann in annotations})
    image_num = {sid: i + 1 for i, sid in enumerate(used_ids)}
    labels = sorted({ann.class_label.value for ann in annotations})
    cat_num = {name: i + 1 for i, name in enumerate(labels)}

    images = []
    for sid in used_ids:
        h, w = size_of(sid)
        images.append({"id": image_num[sid], "file_name": f"{sid}.png",
                       "width": int(w), "height": int(h)})
    coco_annotations = []
    for i, ann in enumerate(annotations):
        if ann.polygon is None:
            raise DatasetError(f"annotation {i} on {ann.image_id!r} has no polygon to export")
        h, w = size_of(ann.image_id)
        area = int(rasterize(ann, (h, w)).sum())
        flat = [float(v) for xy in ann.polygon for v in xy]
        coco_annotations.append({
            "id": i + 1,
            "image_id": image_num[ann.image_id],
            "category_id": cat_num[ann.class_label.value],
            "segmentation": [flat],
            "bbox": polygon_bbox(ann.polygon),
            "area": area,
            "iscrowd": 0,
        })
    categories = [{"id": cat_num[name], "name": name} for name in labels]
    return {"images": images, "annotations": coco_annotations, "categories": categories}


def import_coco(doc: dict) -> list[MaskAnnotation]:
    """Inverse of export_coco: recover polygon annotations with string ids."""
    id_to_name = {img["id"]: img["file_name"].rsplit(".", 1)[0] for img in doc["images"]}
    cat_to_label = {c["id"]: Label(c["name"]) for c in doc["categories"]}
    annotations = []
    for ann in doc["annotations"]:
        seg = ann["segmentation"]
        if not seg or not isinstance(seg, list):
            raise DatasetError(f"annotation {ann.get('id')} has no polygon segmentation")
        flat = seg[0]
        polygon = [(float(flat[i]), float(flat[i + 1])) for i in range(0, len(flat), 2)]
        annotations.append(
            MaskAnnotation(
                image_id=id_to_name[ann["image_id"]],
                class_label=cat_to_label[ann["category_id"]],
                polygon=polygon,
            )
        )
    return annotations
