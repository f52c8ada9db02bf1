"""Heatmap methods: gradient-weighted, gradient-squared and score-weighted."""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..errors import ConfigError
from .model_iface import DifferentiableModel, TorchModel

SCORECAM_BUDGET = 64


@dataclass
class Heatmap:
    """Non-negative class-activation map at input resolution, max-normalized."""

    values: np.ndarray
    layer: str
    class_index: int
    method: str

    def __post_init__(self):
        if self.values.min() < 0.0:
            raise ConfigError("heatmap values must be non-negative")
        peak = self.values.max()
        if peak > 0 and abs(peak - 1.0) > 1e-9:
            raise ConfigError("non-zero heatmaps must be max-normalized")


def _upsample(map2d: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    h, w = size
    return cv2.resize(map2d.astype(np.float64), (w, h), interpolation=cv2.INTER_LINEAR)


def _finalize(raw: np.ndarray, size: tuple[int, int], layer: str,
              class_index: int, method: str) -> Heatmap:
    up = _upsample(raw, size)
    up = np.maximum(up, 0.0)
    peak = up.max()
    if peak > 0:
        up = up / peak
    return Heatmap(values=up, layer=layer, class_index=class_index, method=method)


def _resolve_class(model: DifferentiableModel, image: np.ndarray,
                   class_index: int | None) -> int:
    if class_index is not None:
        return class_index
    return int(np.argmax(model.forward(image)))


def gradcam(model: TorchModel, image: np.ndarray, class_index: int | None = None,
            layer: str | None = None) -> Heatmap:
    """Weight each activation map by its average gradient, then combine.

    map = ReLU(sum_k GAP(dy_c/dA_k) * A_k), upsampled and max-normalized.
    """
    layer = layer or model.default_layer()
    class_index = _resolve_class(model, image, class_index)
    act, grads = model.activations_and_grads(image, layer, class_index)
    weights = grads.mean(axis=(1, 2))
    raw = np.maximum((weights[:, None, None] * act).sum(axis=0), 0.0)
    return _finalize(raw, image.shape[:2], layer, class_index, "gradcam")


def gradcam_pp(model: TorchModel, image: np.ndarray, class_index: int | None = None,
               layer: str | None = None, literal_squared: bool = False) -> Heatmap:
    """Positive-gradient variant with per-location alpha weights.

    alpha = g^2 / (2 g^2 + sum_spatial(A) g^3) with 0/0 -> 0, and
    w_k = sum(alpha * ReLU(g)). ``literal_squared`` swaps in the plain
    squared-positive-gradient pooling for comparison.
    """
    layer = layer or model.default_layer()
    class_index = _resolve_class(model, image, class_index)
    act, grads = model.activations_and_grads(image, layer, class_index)
    positive = np.maximum(grads, 0.0)
    if literal_squared:
        weights = (positive ** 2).mean(axis=(1, 2))
    else:
        g2 = grads ** 2
        g3 = grads ** 3
        act_sums = act.sum(axis=(1, 2))
        denom = 2.0 * g2 + act_sums[:, None, None] * g3
        alpha = np.divide(g2, denom, out=np.zeros_like(g2), where=denom != 0)
        weights = (alpha * positive).sum(axis=(1, 2))
    raw = np.maximum((weights[:, None, None] * act).sum(axis=0), 0.0)
    return _finalize(raw, image.shape[:2], layer, class_index, "gradcam_pp")


def scorecam(model: TorchModel, image: np.ndarray, class_index: int | None = None,
             layer: str | None = None, budget: int = SCORECAM_BUDGET,
             batch_size: int = 16) -> Heatmap:
    """Gradient-free: weight activation maps by their masked class scores.

    Each map is min-max normalized, upsampled and used to mask the input;
    weights are a softmax over (masked score - zero-input score).
    """
    layer = layer or model.default_layer()
    class_index = _resolve_class(model, image, class_index)
    act = model.activations(image, layer)
    size = image.shape[:2]

    if act.shape[0] > budget:
        energy = np.abs(act).sum(axis=(1, 2))
        keep = np.sort(np.argsort(-energy, kind="stable")[:budget])
        act = act[keep]

    upsampled = np.stack([_upsample(a, size) for a in act])
    masks = np.empty_like(upsampled)
    for k, a in enumerate(upsampled):
        lo, hi = a.min(), a.max()
        masks[k] = (a - lo) / (hi - lo) if hi > lo else np.zeros_like(a)

    base = np.asarray(image, dtype=np.float64)
    masked_batch = masks[:, :, :, None] * base[None, :, :, :]
    zero_input = np.zeros((1,) + base.shape)
    baseline = model.masked_forward(zero_input)[0, class_index]
    scores = np.empty(len(masks))
    for start in range(0, len(masks), batch_size):
        chunk = masked_batch[start:start + batch_size]
        scores[start:start + len(chunk)] = model.masked_forward(chunk)[:, class_index]

    shifted = scores - baseline
    shifted -= shifted.max()
    weights = np.exp(shifted)
    weights /= weights.sum()
    raw = np.maximum((weights[:, None, None] * upsampled).sum(axis=0), 0.0)
    return _finalize(raw, size, layer, class_index, "scorecam")


CAM_METHODS = {
    "gradcam": gradcam,
    "gradcam_pp": gradcam_pp,
    "scorecam": scorecam,
}


def compute_cam(method: str, model: TorchModel, image: np.ndarray,
                class_index: int | None = None, layer: str | None = None) -> Heatmap:
    if method not in CAM_METHODS:
        raise ConfigError(f"unknown CAM method {method!r}; valid: {sorted(CAM_METHODS)}")
    return CAM_METHODS[method](model, image, class_index=class_index, layer=layer)
