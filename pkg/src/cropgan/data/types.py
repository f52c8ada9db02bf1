"""Core dataset records: samples, manifests, pairs and mask annotations."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DatasetError

MANIFEST_SCHEMA_VERSION = 1


class Label(str, enum.Enum):
    HEALTHY = "healthy"
    BLACK_SCURF = "black_scurf"
    COMMON_SCAB = "common_scab"


class Split(str, enum.Enum):
    TRAIN = "train"
    TEST = "test"
    UNASSIGNED = "unassigned"


class Provenance(str, enum.Enum):
    RAW = "raw"
    PREPROCESSED = "preprocessed"
    AUGMENTED = "augmented"
    GENERATED = "generated"


DISEASE_LABELS = (Label.BLACK_SCURF, Label.COMMON_SCAB)


@dataclass
class ImageSample:
    """One decoded image with its label, split tag and provenance.

    ``pixels`` is an H x W x 3 uint8 array; it may be None for
    metadata-only manifests (images still on disk under ``path``).
    Augmented and generated samples must carry a non-empty ``source_id``.
    """

    id: str
    label: Label
    pixels: np.ndarray | None = None
    split: Split = Split.UNASSIGNED
    provenance: Provenance = Provenance.RAW
    source_id: str | None = None
    path: str | None = None

    def __post_init__(self):
        if self.provenance in (Provenance.AUGMENTED, Provenance.GENERATED):
            if not self.source_id:
                raise DatasetError(
                    f"sample {self.id!r}: {self.provenance.value} samples need a source_id"
                )
        if self.pixels is not None:
            validate_pixels(self.pixels, self.id)

    def require_pixels(self) -> np.ndarray:
        if self.pixels is None:
            raise DatasetError(f"sample {self.id!r} has no pixel data loaded")
        return self.pixels

    def to_meta(self) -> dict:
        return {
            "id": self.id,
            "label": self.label.value,
            "split": self.split.value,
            "provenance": self.provenance.value,
            "source_id": self.source_id,
            "path": self.path,
        }

    @classmethod
    def from_meta(cls, meta: dict) -> "ImageSample":
        return cls(
            id=meta["id"],
            label=Label(meta["label"]),
            split=Split(meta["split"]),
            provenance=Provenance(meta["provenance"]),
            source_id=meta.get("source_id"),
            path=meta.get("path"),
        )


def validate_pixels(pixels: np.ndarray, sample_id: str = "?") -> None:
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise DatasetError(
            f"sample {sample_id!r}: expected HxWx3 pixels, got shape {pixels.shape}"
        )
    if pixels.shape[0] < 2 or pixels.shape[1] < 2:
        raise DatasetError(f"sample {sample_id!r}: degenerate image {pixels.shape}")
    if pixels.dtype != np.uint8:
        raise DatasetError(f"sample {sample_id!r}: pixels must be uint8, got {pixels.dtype}")


@dataclass
class DatasetManifest:
    """Ordered collection of samples with split bookkeeping."""

    samples: list[ImageSample] = field(default_factory=list)
    split_seed: int | None = None
    errors: list[str] = field(default_factory=list)

    def __post_init__(self):
        ids = [s.id for s in self.samples]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DatasetError(f"duplicate sample ids in manifest: {dupes[:5]}")

    @property
    def class_counts(self) -> dict[Label, int]:
        counts: dict[Label, int] = {}
        for s in self.samples:
            counts[s.label] = counts.get(s.label, 0) + 1
        return counts

    def by_id(self) -> dict[str, ImageSample]:
        return {s.id: s for s in self.samples}

    def subset(self, *, label: Label | None = None, split: Split | None = None,
               provenance: Provenance | None = None) -> list[ImageSample]:
        out = self.samples
        if label is not None:
            out = [s for s in out if s.label == label]
        if split is not None:
            out = [s for s in out if s.split == split]
        if provenance is not None:
            out = [s for s in out if s.provenance == provenance]
        return list(out)

    def to_json(self) -> str:
        doc = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "split_seed": self.split_seed,
            "samples": [s.to_meta() for s in self.samples],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        doc = json.loads(Path(path).read_text())
        if doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
            raise DatasetError(
                f"manifest schema version {doc.get('schema_version')} not supported"
            )
        return cls(
            samples=[ImageSample.from_meta(m) for m in doc["samples"]],
            split_seed=doc.get("split_seed"),
        )


@dataclass(frozen=True)
class ImagePair:
    """A healthy input image bound to a diseased target image."""

    input_id: str
    target_id: str
    disease: Label

    def __post_init__(self):
        if self.disease == Label.HEALTHY:
            raise DatasetError("pair disease must be a disease label, not healthy")


@dataclass
class MaskAnnotation:
    """Polygon (or bitmask) annotation of one disease region on one image."""

    image_id: str
    class_label: Label
    polygon: list[tuple[float, float]] | None = None
    bitmask: np.ndarray | None = None

    def __post_init__(self):
        if self.polygon is None and self.bitmask is None:
            raise DatasetError(f"annotation on {self.image_id!r} has neither polygon nor bitmask")
        if self.polygon is not None and len(self.polygon) < 3:
            raise DatasetError(
                f"annotation on {self.image_id!r}: polygon needs >= 3 vertices, got {len(self.polygon)}"
            )
