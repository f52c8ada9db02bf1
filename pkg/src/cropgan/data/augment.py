"""Deterministic per-sample augmentations: flips, rotations, colour jitter."""

from __future__ import annotations

import zlib

import cv2
import numpy as np
from scipy import ndimage

from ..errors import DatasetError
from .types import ImageSample, Provenance
from .preprocess import PreprocessConfig

AUGMENT_OPS = ("hflip", "vflip", "rotate", "brightness", "color_jitter")


def _rng_for(seed: int, sample_id: str, op: str) -> np.random.Generator:
    # per-(sample, op) stream so parallel execution cannot change outputs
    entropy = [seed, zlib.crc32(sample_id.encode()), zlib.crc32(op.encode())]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def hflip(pixels: np.ndarray) -> np.ndarray:
    return pixels[:, ::-1].copy()


def vflip(pixels: np.ndarray) -> np.ndarray:
    return pixels[::-1, :].copy()


def rotate(pixels: np.ndarray, angle: float) -> np.ndarray:
    """Rotate about the centre; out-of-frame pixels take reflected values.

    Right angles are exact array rotations; free angles interpolate.
    """
    angle = angle % 360.0
    if angle == 0.0:
        return pixels.copy()
    if angle in (90.0, 180.0, 270.0) and pixels.shape[0] == pixels.shape[1]:
        return np.ascontiguousarray(np.rot90(pixels, k=int(angle // 90)))
    return ndimage.rotate(pixels, angle, reshape=False, order=1, mode="reflect")


def brightness(pixels: np.ndarray, delta: float) -> np.ndarray:
    """Scale pixel intensities by (1 + delta)."""
    out = pixels.astype(np.float32) * (1.0 + delta)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def color_jitter(pixels: np.ndarray, dh: float, dl: float, ds: float) -> np.ndarray:
    """Shift hue/lightness/saturation channels by the given deltas."""
    hls = cv2.cvtColor(pixels, cv2.COLOR_RGB2HLS).astype(np.float32)
    hls[:, :, 0] = (hls[:, :, 0] + dh) % 180.0
    hls[:, :, 1] = np.clip(hls[:, :, 1] + dl, 0, 255)
    hls[:, :, 2] = np.clip(hls[:, :, 2] + ds, 0, 255)
    return cv2.cvtColor(hls.astype(np.uint8), cv2.COLOR_HLS2RGB)


def augment(sample: ImageSample, ops: list[str], seed: int,
            cfg: PreprocessConfig | None = None) -> list[ImageSample]:
    """Produce one augmented sample per requested op.

    Deterministic: randomness is drawn from streams keyed on
    (seed, sample id, op name). An empty op list yields an empty list.
    """
    cfg = cfg or PreprocessConfig()
    pixels = sample.require_pixels()
    out: list[ImageSample] = []
    for op in ops:
        if op not in AUGMENT_OPS:
            raise DatasetError(f"unknown augment op {op!r}; valid: {AUGMENT_OPS}")
        rng = _rng_for(seed, sample.id, op)
        if op == "hflip":
            aug = hflip(pixels)
        elif op == "vflip":
            aug = vflip(pixels)
        elif op == "rotate":
            angles = list(cfg.rotation_angles) + [cfg.free_rotation_angle]
            aug = rotate(pixels, float(rng.choice(angles)))
        elif op == "brightness":
            aug = brightness(pixels, float(rng.uniform(-cfg.brightness_jitter, cfg.brightness_jitter)))
        else:
            dh, dl, ds = cfg.hsl_jitter
            aug = color_jitter(
                pixels,
                float(rng.uniform(-dh, dh)),
                float(rng.uniform(-dl, dl)),
                float(rng.uniform(-ds, ds)),
            )
        out.append(
            ImageSample(
                id=f"{sample.id}__aug_{op}",
                label=sample.label,
                pixels=aug,
                split=sample.split,
                provenance=Provenance.AUGMENTED,
                source_id=sample.id,
            )
        )
    return out
