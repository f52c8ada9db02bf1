"""Synthetic desk-scale corpus: blotched ellipsoids on textured discs.

Stands in for field imagery so every stage of the toolkit can run and be
tested without real data. Diseased samples come with ground-truth blotch
masks, which downstream annotation and segmentation tests reuse.
"""

from __future__ import annotations

import zlib
from pathlib import Path

import cv2
import numpy as np

from .types import DISEASE_LABELS, ImageSample, Label

# base tuber tones (RGB) and per-disease blotch tones
_TUBER_RGB = np.array([178.0, 140.0, 96.0])
_BACKGROUND_RGB = np.array([52.0, 58.0, 50.0])
_BLOTCH_RGB = {
    Label.BLACK_SCURF: np.array([46.0, 36.0, 30.0]),
    Label.COMMON_SCAB: np.array([196.0, 156.0, 92.0]),
}


def _sample_rng(seed: int, sample_id: str) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([seed, zlib.crc32(sample_id.encode())])
    )


def _smooth_noise(rng: np.random.Generator, size: int, sigma: float) -> np.ndarray:
    noise = rng.normal(0.0, 1.0, size=(size, size)).astype(np.float32)
    noise = cv2.GaussianBlur(noise, (0, 0), sigma)
    peak = np.abs(noise).max()
    return noise / peak if peak > 0 else noise


def _tuber_disc(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cx = size / 2 + rng.uniform(-0.05, 0.05) * size
    cy = size / 2 + rng.uniform(-0.05, 0.05) * size
    ax = rng.uniform(0.30, 0.42) * size
    ay = rng.uniform(0.26, 0.40) * size
    theta = rng.uniform(0, np.pi)
    xr = (xx - cx) * np.cos(theta) + (yy - cy) * np.sin(theta)
    yr = -(xx - cx) * np.sin(theta) + (yy - cy) * np.cos(theta)
    return (xr / ax) ** 2 + (yr / ay) ** 2 <= 1.0


def _blotch_mask(rng: np.random.Generator, size: int, tuber: np.ndarray) -> np.ndarray:
    """One organic blob: a thresholded smoothed impulse, clipped to the disc."""
    ys, xs = np.nonzero(tuber)
    k = rng.integers(0, len(ys))
    cy, cx = int(ys[k]), int(xs[k])
    field = np.zeros((size, size), np.float32)
    radius = max(2, int(rng.uniform(0.05, 0.14) * size))
    n_seeds = int(rng.integers(3, 7))
    for _ in range(n_seeds):
        dy = int(rng.integers(-radius, radius + 1))
        dx = int(rng.integers(-radius, radius + 1))
        y = min(max(cy + dy, 0), size - 1)
        x = min(max(cx + dx, 0), size - 1)
        field[y, x] = 1.0
    field = cv2.GaussianBlur(field, (0, 0), radius * 0.6)
    if field.max() <= 0:
        return np.zeros((size, size), bool)
    blob = field >= 0.35 * field.max()
    return blob & tuber


def make_sample(label: Label, sample_id: str, seed: int, size: int = 224
                ) -> tuple[np.ndarray, np.ndarray]:
    """Render one tuber image; returns (uint8 HxWx3 image, boolean disease mask).

    The mask is all-False for healthy samples.
    """
    rng = _sample_rng(seed, sample_id)
    tuber = _tuber_disc(rng, size)

    base = np.empty((size, size, 3), np.float64)
    base[:] = _BACKGROUND_RGB + rng.normal(0, 2.5, size=(size, size, 3))
    tint = rng.uniform(0.85, 1.12)
    texture = _smooth_noise(rng, size, sigma=size * 0.03) * 22.0
    for c in range(3):
        channel = _TUBER_RGB[c] * tint + texture
        base[..., c] = np.where(tuber, channel + rng.normal(0, 3.0, (size, size)), base[..., c])

    disease = np.zeros((size, size), bool)
    if label != Label.HEALTHY:
        n_blotches = int(rng.integers(2, 5))
        for _ in range(n_blotches):
            disease |= _blotch_mask(rng, size, tuber)
        tone = _BLOTCH_RGB[label]
        rough = _smooth_noise(rng, size, sigma=max(1.0, size * 0.008)) * 18.0
        for c in range(3):
            base[..., c] = np.where(disease, tone[c] + rough, base[..., c])

    return np.clip(base, 0, 255).astype(np.uint8), disease


def generate_corpus(counts: dict[Label, int], seed: int, size: int = 224
                    ) -> tuple[list[ImageSample], dict[str, np.ndarray]]:
    """Generate an in-memory corpus; returns (samples, disease masks by id)."""
    samples: list[ImageSample] = []
    masks: dict[str, np.ndarray] = {}
    for label in sorted(counts, key=lambda l: l.value):
        for i in range(counts[label]):
            sid = f"{label.value}/synth_{i:04d}"
            img, mask = make_sample(label, sid, seed, size)
            samples.append(ImageSample(id=sid, label=label, pixels=img))
            if label in DISEASE_LABELS:
                masks[sid] = mask
    return samples, masks


def write_corpus(root: str | Path, counts: dict[Label, int], seed: int,
                 size: int = 224) -> dict[str, np.ndarray]:
    """Write a corpus as root/<label>/<name>.png; returns disease masks by id."""
    root = Path(root)
    samples, masks = generate_corpus(counts, seed, size)
    for s in samples:
        out = root / s.label.value / (s.id.split("/")[-1] + ".png")
        out.parent.mkdir(parents=True, exist_ok=True)
        cv2.imwrite(str(out), cv2.cvtColor(s.require_pixels(), cv2.COLOR_RGB2BGR))
    return masks
