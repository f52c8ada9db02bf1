"""Heatmap overlays and the model x method explanation grid."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib
import numpy as np

from ..errors import ShapeError
from .methods import Heatmap, compute_cam
from .model_iface import TorchModel


def overlay(heatmap: Heatmap | np.ndarray, image: np.ndarray, alpha: float = 0.5,
            colormap: str = "jet") -> np.ndarray:
    """Blend a colormapped heatmap onto the image: a*cmap(h) + (1-a)*image."""
    values = heatmap.values if isinstance(heatmap, Heatmap) else np.asarray(heatmap)
    if values.shape != image.shape[:2]:
        raise ShapeError(
            f"heatmap {values.shape} does not match image {image.shape[:2]}")
    if not 0.0 <= alpha <= 1.0:
        raise ShapeError(f"alpha must be in [0, 1], got {alpha}")
    cmap = matplotlib.colormaps[colormap]
    colored = cmap(values)[:, :, :3] * 255.0
    blended = alpha * colored + (1.0 - alpha) * image.astype(np.float64)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


_TILE_GAP = 4


def explain_grid(models: list[tuple[str, TorchModel]], methods: list[str],
                 images: list, layer: str | None = None,
                 class_index: int | None = None, alpha: float = 0.5,
                 colormap: str = "jet") -> tuple[np.ndarray, dict]:
    """Render a tile grid: one row per (model, image), one column per method.

    A failing cell renders as a flat gray tile and the run continues; the
    manifest records every cell's model, method, image, class and error.
    """
    if not models or not methods or not images:
        raise ShapeError("explain_grid needs non-empty models, methods and images")
    rows = [(name, model, sample) for name, model in models for sample in images]
    h, w = images[0].require_pixels().shape[:2]
    grid = np.full((len(rows) * (h + _TILE_GAP) - _TILE_GAP,
                    len(methods) * (w + _TILE_GAP) - _TILE_GAP, 3), 255, np.uint8)
    manifest = {"rows": [], "columns": list(methods), "cells": []}
    for r, (model_name, model, sample) in enumerate(rows):
        manifest["rows"].append({"model": model_name, "image": sample.id})
        for c, method in enumerate(methods):
            cell = {"row": r, "col": c, "model": model_name, "method": method,
                    "image": sample.id}
            pixels = sample.require_pixels()
            try:
                heatmap = compute_cam(method, model, pixels,
                                      class_index=class_index, layer=layer)
                tile = overlay(heatmap, pixels, alpha=alpha, colormap=colormap)
                cell["class_index"] = heatmap.class_index
                cell["layer"] = heatmap.layer
            except Exception as exc:
                tile = np.full((h, w, 3), 128, np.uint8)
                cell["error"] = str(exc)
            y0 = r * (h + _TILE_GAP)
            x0 = c * (w + _TILE_GAP)
            grid[y0:y0 + h, x0:x0 + w] = tile
            manifest["cells"].append(cell)
    return grid, manifest


def save_grid(grid: np.ndarray, manifest: dict, out_dir: str | Path,
              stem: str = "cam_grid") -> dict:
    """Write the grid PNG and its manifest JSON; returns their paths."""
    import cv2

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    png = out_dir / f"{stem}.png"
    cv2.imwrite(str(png), cv2.cvtColor(grid, cv2.COLOR_RGB2BGR))
    meta = out_dir / f"{stem}.json"
    meta.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return {"grid": str(png), "manifest": str(meta)}
