"""Manifest loading, stratified splitting and healthy/diseased pairing."""

from __future__ import annotations

import math
from pathlib import Path

import cv2
import numpy as np

from ..errors import DatasetError
from .types import (
    DatasetManifest,
    ImagePair,
    ImageSample,
    Label,
    Split,
)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


def load_manifest(root: str | Path, layout: str = "label_dirs") -> DatasetManifest:
    """Scan ``root/<label>/<file>.{png,jpg}`` into a manifest.

    Unreadable files become per-file error entries; the manifest is still
    returned. A directory with no decodable image at all is a hard error.
    """
    if layout != "label_dirs":
        raise DatasetError(f"unknown layout {layout!r}")
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} does not exist")

    samples: list[ImageSample] = []
    errors: list[str] = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            label = Label(sub.name)
        except ValueError:
            errors.append(f"{sub}: directory name is not a known label")
            continue
        for f in sorted(sub.iterdir()):
            if f.suffix.lower() not in IMAGE_EXTENSIONS:
                continue
            bgr = cv2.imread(str(f), cv2.IMREAD_COLOR)
            if bgr is None:
                errors.append(f"{f}: unreadable image")
                continue
            samples.append(
                ImageSample(
                    id=f"{label.value}/{f.stem}",
                    label=label,
                    pixels=cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB),
                    path=str(f),
                )
            )
    if not samples:
        raise DatasetError(f"no images found under {root}")
    return DatasetManifest(samples=samples, errors=errors)


def _root_of(sample: ImageSample, by_id: dict[str, ImageSample]) -> ImageSample:
    seen = set()
    cur = sample
    while cur.source_id is not None:
        if cur.id in seen:
            raise DatasetError(f"source_id cycle at sample {cur.id!r}")
        seen.add(cur.id)
        parent = by_id.get(cur.source_id)
        if parent is None:
            raise DatasetError(f"sample {cur.id!r} references missing source {cur.source_id!r}")
        cur = parent
    return cur


def split_dataset(manifest: DatasetManifest, ratio: float = 0.8,
                  seed: int = 0) -> DatasetManifest:
    """Assign train/test splits, stratified per class.

    Only root samples (no source_id) are drawn; derived samples inherit
    their root's split so augmented or generated children never leak
    across the boundary. Train count per class is floor(ratio * n).
    """
    if not 0.0 < ratio < 1.0:
        raise DatasetError(f"split ratio must be in (0, 1), got {ratio}")
    if any(s.split != Split.UNASSIGNED for s in manifest.samples):
        raise DatasetError("split_dataset requires all samples unassigned")

    by_id = manifest.by_id()
    roots = [s for s in manifest.samples if s.source_id is None]
    rng = np.random.default_rng(seed)
    for label in sorted({s.label for s in roots}, key=lambda l: l.value):
        group = [s for s in roots if s.label == label]
        if len(group) < 2:
            raise DatasetError(
                f"class {label.value!r} has {len(group)} root sample(s); cannot stratify"
            )
        n_train = math.floor(ratio * len(group))
        n_train = min(max(n_train, 1), len(group) - 1)
        order = rng.permutation(len(group))
        for rank, idx in enumerate(order):
            group[idx].split = Split.TRAIN if rank < n_train else Split.TEST

    for s in manifest.samples:
        if s.source_id is not None:
            s.split = _root_of(s, by_id).split
    manifest.split_seed = seed
    return manifest


def pair_images(healthy: list[ImageSample], diseased: list[ImageSample],
                k: int = 10, seed: int = 0) -> list[ImagePair]:
    """Couple each diseased image with k distinct healthy partners.

    Partners are sampled without replacement per diseased image; the
    result is deterministic for a given seed and input order.
    """
    if len(healthy) < k:
        raise DatasetError(
            f"need at least k={k} healthy images to pair, got {len(healthy)}"
        )
    for s in healthy:
        if s.label != Label.HEALTHY:
            raise DatasetError(f"sample {s.id!r} in the healthy pool has label {s.label.value}")
    for s in diseased:
        if s.label == Label.HEALTHY:
            raise DatasetError(f"sample {s.id!r} in the diseased pool is healthy")

    rng = np.random.default_rng(seed)
    pairs: list[ImagePair] = []
    for d in diseased:
        partner_idx = rng.choice(len(healthy), size=k, replace=False)
        for i in partner_idx:
            pairs.append(ImagePair(input_id=healthy[i].id, target_id=d.id, disease=d.label))
    return pairs
