"""Inference: turn healthy images into disease-styled images."""

from __future__ import annotations

import numpy as np
import torch

from ..data.types import ImageSample, Label, Provenance
from ..errors import ConfigError, ShapeError
from .nets import GeneratorSpec, make_generator
from .train import images_to_tensor, tensor_to_images


def load_generator(checkpoint: dict, direction: str) -> torch.nn.Module:
    """Rebuild the generator that maps toward ``direction``.

    For unpaired checkpoints, direction "healthy" selects the reverse
    generator; otherwise the target disease must match the checkpoint.
    """
    kind = checkpoint.get("kind")
    if kind not in ("pix2pix", "cyclegan"):
        raise ConfigError(f"unrecognized checkpoint kind {kind!r}")
    if direction == checkpoint.get("disease"):
        weights = checkpoint["generator"]
    elif direction == "healthy" and kind == "cyclegan":
        weights = checkpoint["generator_reverse"]
    else:
        raise ConfigError(
            f"checkpoint translates toward {checkpoint.get('disease')!r}"
            + (" or 'healthy'" if kind == "cyclegan" else "")
            + f", not {direction!r}"
        )
    spec = GeneratorSpec(**checkpoint["generator_spec"])
    gen = make_generator(spec)
    gen.load_state_dict(weights)
    gen.eval()
    return gen


def translate(sample: ImageSample, checkpoint: dict, direction: str) -> ImageSample:
    """Translate one image; output keeps the input's resolution contract."""
    pixels = sample.require_pixels()
    expected = checkpoint["cfg"]["image_size"]
    if pixels.shape[0] != expected or pixels.shape[1] != expected:
        raise ShapeError(
            f"checkpoint expects {expected}x{expected} inputs, got {pixels.shape[:2]}"
        )
    gen = load_generator(checkpoint, direction)
    with torch.no_grad():
        out = gen(images_to_tensor([pixels]))
    out_pixels = tensor_to_images(out)[0]
    label = Label(direction) if direction != "healthy" else Label.HEALTHY
    return ImageSample(
        id=f"{sample.id}__gen_{checkpoint['kind']}_{direction}",
        label=label,
        pixels=out_pixels,
        split=sample.split,
        provenance=Provenance.GENERATED,
        source_id=sample.id,
    )


def mean_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute difference between two uint8 images on the [-1, 1] scale."""
    return float(np.abs(a.astype(np.float64) - b.astype(np.float64)).mean() / 127.5)
