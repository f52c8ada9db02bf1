"""Image preprocessing chain: resize, bilateral denoise, stretch, CLAHE."""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..errors import DatasetError
from .types import ImageSample, Provenance, validate_pixels


@dataclass
class PreprocessConfig:
    target_size: tuple[int, int] = (224, 224)
    bilateral_diameter: int = 9
    bilateral_sigma_color: float = 75.0
    bilateral_sigma_space: float = 75.0
    stretch_low_percentile: float = 2.0
    stretch_high_percentile: float = 98.0
    clahe_clip_limit: float = 2.0
    clahe_tile_grid: tuple[int, int] = (8, 8)
    # stochastic colour/brightness jitter lives in augment, not here
    hsl_jitter: tuple[float, float, float] = (8.0, 12.0, 12.0)
    brightness_jitter: float = 0.15
    rotation_angles: tuple[float, ...] = (90.0, 180.0, 270.0)
    free_rotation_angle: float = 25.0

    def __post_init__(self):
        lo, hi = self.stretch_low_percentile, self.stretch_high_percentile
        if not (0.0 <= lo < hi <= 100.0):
            raise DatasetError(f"stretch percentiles must satisfy 0 <= low < high <= 100, got ({lo}, {hi})")
        if self.clahe_clip_limit <= 0:
            raise DatasetError("clahe clip_limit must be > 0")


def resize(pixels: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    h, w = size
    interp = cv2.INTER_AREA if pixels.shape[0] > h else cv2.INTER_LINEAR
    return cv2.resize(pixels, (w, h), interpolation=interp)


def bilateral_denoise(pixels: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    return cv2.bilateralFilter(
        pixels, cfg.bilateral_diameter, cfg.bilateral_sigma_color, cfg.bilateral_sigma_space
    )


def contrast_stretch(pixels: np.ndarray, low_pct: float, high_pct: float) -> np.ndarray:
    """Linearly map the [low, high] percentile range onto [0, 255].

    Degenerate range (constant-ish image) leaves the input unchanged.
    """
    lo = float(np.percentile(pixels, low_pct))
    hi = float(np.percentile(pixels, high_pct))
    if hi <= lo:
        return pixels.copy()
    stretched = (pixels.astype(np.float32) - lo) * (255.0 / (hi - lo))
    return np.clip(np.rint(stretched), 0, 255).astype(np.uint8)


def clahe_equalize(pixels: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    """CLAHE on the LAB lightness channel, preserving hue."""
    clahe = cv2.createCLAHE(clipLimit=cfg.clahe_clip_limit, tileGridSize=cfg.clahe_tile_grid)
    lab = cv2.cvtColor(pixels, cv2.COLOR_RGB2LAB)
    lab[:, :, 0] = clahe.apply(lab[:, :, 0])
    return cv2.cvtColor(lab, cv2.COLOR_LAB2RGB)


def preprocess_pixels(pixels: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    """Fixed-order chain: resize -> bilateral -> stretch -> CLAHE.

    Denoising runs before contrast amplification so noise is not amplified.
    """
    validate_pixels(pixels)
    out = resize(pixels, cfg.target_size)
    out = bilateral_denoise(out, cfg)
    out = contrast_stretch(out, cfg.stretch_low_percentile, cfg.stretch_high_percentile)
    return clahe_equalize(out, cfg)


def preprocess(sample: ImageSample, cfg: PreprocessConfig | None = None) -> ImageSample:
    cfg = cfg or PreprocessConfig()
    out = preprocess_pixels(sample.require_pixels(), cfg)
    return ImageSample(
        id=sample.id,
        label=sample.label,
        pixels=out,
        split=sample.split,
        provenance=Provenance.PREPROCESSED,
        source_id=sample.source_id,
        path=sample.path,
    )
