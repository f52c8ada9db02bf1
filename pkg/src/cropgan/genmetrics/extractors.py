"""Pluggable feature extractors backing FID and the inception score."""

from __future__ import annotations

import cv2
import numpy as np
import torch
from torch import nn

from ..errors import ConfigError, ShapeError


class FeatureExtractor:
    """Interface: embed images into features and classify them.

    Implementations must be deterministic in inference mode. ``images``
    is an (n, H, W, 3) uint8 array.
    """

    name: str = "base"
    dim: int = 0
    n_classes: int = 0

    def embed(self, images: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def classify(self, images: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _check_images(images: np.ndarray) -> np.ndarray:
    images = np.asarray(images)
    if images.ndim != 4 or images.shape[3] != 3:
        raise ShapeError(f"expected (n, H, W, 3) images, got shape {images.shape}")
    return images


class RandomProjectionExtractor(FeatureExtractor):
    """Fixed seeded projection of downsampled grayscale pixels.

    No learned weights, no downloads: the cheap desk-scale stand-in for
    a pretrained embedding network.
    """

    def __init__(self, dim: int = 16, n_classes: int = 3, seed: int = 0,
                 patch: int = 16):
        rng = np.random.default_rng(seed)
        self.name = f"random_projection_{dim}d"
        self.dim = dim
        self.n_classes = n_classes
        self.patch = patch
        self._w_embed = rng.normal(0.0, 1.0 / patch, size=(patch * patch, dim))
        self._w_class = rng.normal(0.0, 1.0, size=(dim, n_classes))

    def _flatten(self, images: np.ndarray) -> np.ndarray:
        images = _check_images(images)
        rows = []
        for img in images:
            gray = cv2.cvtColor(img, cv2.COLOR_RGB2GRAY)
            small = cv2.resize(gray, (self.patch, self.patch), interpolation=cv2.INTER_AREA)
            rows.append(small.astype(np.float64).reshape(-1) / 255.0)
        return np.stack(rows)

    def embed(self, images: np.ndarray) -> np.ndarray:
        return self._flatten(images) @ self._w_embed

    def classify(self, images: np.ndarray) -> np.ndarray:
        logits = self.embed(images) @ self._w_class
        logits -= logits.max(axis=1, keepdims=True)
        expd = np.exp(logits)
        return expd / expd.sum(axis=1, keepdims=True)


class _SmallCnn(nn.Module):
    def __init__(self, n_classes: int, width: int = 16):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(3, width, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, width * 2, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.AdaptiveAvgPool2d(1),
        )
        self.head = nn.Linear(width * 2, n_classes)

    def forward(self, x):
        z = self.features(x).flatten(1)
        return self.head(z), z


class TinyCnnExtractor(FeatureExtractor):
    """Small trainable CNN; embeddings come from its pooled feature layer."""

    def __init__(self, n_classes: int = 3, width: int = 16, seed: int = 0):
        torch.manual_seed(seed)
        self.name = f"tiny_cnn_{width * 2}d"
        self.dim = width * 2
        self.n_classes = n_classes
        self.net = _SmallCnn(n_classes, width)
        self.net.eval()

    def fit(self, images: np.ndarray, labels: np.ndarray, epochs: int = 5,
            lr: float = 1e-3, batch_size: int = 16, seed: int = 0) -> None:
        x = self._to_tensor(images)
        y = torch.as_tensor(np.asarray(labels), dtype=torch.long)
        gen = torch.Generator().manual_seed(seed)
        opt = torch.optim.Adam(self.net.parameters(), lr=lr)
        loss_fn = nn.CrossEntropyLoss()
        self.net.train()
        for _ in range(epochs):
            order = torch.randperm(len(x), generator=gen)
            for start in range(0, len(x), batch_size):
                idx = order[start:start + batch_size]
                opt.zero_grad()
                logits, _ = self.net(x[idx])
                loss = loss_fn(logits, y[idx])
                loss.backward()
                opt.step()
        self.net.eval()

    @staticmethod
    def _to_tensor(images: np.ndarray) -> torch.Tensor:
        images = _check_images(images)
        arr = images.astype(np.float32) / 127.5 - 1.0
        return torch.from_numpy(arr).permute(0, 3, 1, 2).contiguous()

    @torch.no_grad()
    def embed(self, images: np.ndarray, batch_size: int = 32) -> np.ndarray:
        x = self._to_tensor(images)
        outs = [self.net(x[i:i + batch_size])[1] for i in range(0, len(x), batch_size)]
        return torch.cat(outs).double().numpy()

    @torch.no_grad()
    def classify(self, images: np.ndarray, batch_size: int = 32) -> np.ndarray:
        x = self._to_tensor(images)
        outs = [torch.softmax(self.net(x[i:i + batch_size])[0], dim=1)
                for i in range(0, len(x), batch_size)]
        return torch.cat(outs).double().numpy()


class InceptionV3Extractor(FeatureExtractor):
    """Canonical pretrained inception embedding (needs torchvision weights)."""

    def __init__(self):
        try:
            from torchvision.models import Inception_V3_Weights, inception_v3
        except ImportError as exc:
            raise ConfigError("torchvision is required for the inception extractor") from exc
        try:
            self.net = inception_v3(weights=Inception_V3_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise ConfigError(
                "pretrained inception weights unavailable; use the "
                "random_projection or tiny_cnn extractor instead"
            ) from exc
        self.net.eval()
        self.name = "inception_v3"
        self.dim = 2048
        self.n_classes = 1000
        self._pool = None
        self.net.avgpool.register_forward_hook(
            lambda m, i, o: setattr(self, "_pool", o.flatten(1)))

    @staticmethod
    def _to_tensor(images: np.ndarray) -> torch.Tensor:
        images = _check_images(images)
        x = torch.from_numpy(images.astype(np.float32) / 255.0).permute(0, 3, 1, 2)
        x = torch.nn.functional.interpolate(x, size=(299, 299), mode="bilinear",
                                            align_corners=False)
        mean = torch.tensor([0.485, 0.456, 0.406]).view(1, 3, 1, 1)
        std = torch.tensor([0.229, 0.224, 0.225]).view(1, 3, 1, 1)
        return (x - mean) / std

    @torch.no_grad()
    def embed(self, images: np.ndarray, batch_size: int = 16) -> np.ndarray:
        x = self._to_tensor(images)
        feats = []
        for i in range(0, len(x), batch_size):
            self.net(x[i:i + batch_size])
            feats.append(self._pool)
        return torch.cat(feats).double().numpy()

    @torch.no_grad()
    def classify(self, images: np.ndarray, batch_size: int = 16) -> np.ndarray:
        x = self._to_tensor(images)
        outs = [torch.softmax(self.net(x[i:i + batch_size]), dim=1)
                for i in range(0, len(x), batch_size)]
        return torch.cat(outs).double().numpy()


def make_extractor(name: str, **kwargs) -> FeatureExtractor:
    if name == "random_projection":
        return RandomProjectionExtractor(**kwargs)
    if name == "tiny_cnn":
        return TinyCnnExtractor(**kwargs)
    if name == "inception_v3":
        return InceptionV3Extractor()
    raise ConfigError(f"unknown extractor {name!r}")
