"""Pluggable classifier adapters: tiny CNN, linear, prior and torchvision."""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np
import torch

from ..errors import ConfigError, ShapeError
from ..genmetrics.extractors import _SmallCnn


@dataclass
class ClfTrainConfig:
    learning_rate: float = 1e-2
    batch_size: int = 10
    epochs: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise ConfigError("learning_rate, batch_size and epochs must be positive")


class ClassifierAdapter:
    """Interface: train on labeled images, emit class probabilities."""

    name: str = "base"

    def train(self, images: np.ndarray, labels: np.ndarray, cfg: ClfTrainConfig) -> None:
        raise NotImplementedError

    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def state_dict(self) -> dict:
        raise NotImplementedError

    def load_state_dict(self, state: dict) -> None:
        raise NotImplementedError


def _check_images(images: np.ndarray) -> np.ndarray:
    images = np.asarray(images)
    if images.ndim != 4 or images.shape[3] != 3:
        raise ShapeError(f"expected (n, H, W, 3) images, got {images.shape}")
    return images


class TinyCnnAdapter(ClassifierAdapter):
    """Small from-scratch CNN; the desk-scale benchmark workhorse."""

    def __init__(self, n_classes: int = 3, width: int = 16, name: str = "tiny_cnn"):
        self.name = name
        self.n_classes = n_classes
        self.width = width
        self.net: _SmallCnn | None = None

    def _to_tensor(self, images: np.ndarray) -> torch.Tensor:
        arr = _check_images(images).astype(np.float32) / 127.5 - 1.0
        return torch.from_numpy(arr).permute(0, 3, 1, 2).contiguous()

    def train(self, images: np.ndarray, labels: np.ndarray, cfg: ClfTrainConfig) -> None:
        torch.manual_seed(cfg.seed)
        self.net = _SmallCnn(self.n_classes, self.width)
        x = self._to_tensor(images)
        y = torch.as_tensor(np.asarray(labels), dtype=torch.long)
        gen = torch.Generator().manual_seed(cfg.seed)
        opt = torch.optim.Adam(self.net.parameters(), lr=cfg.learning_rate)
        loss_fn = torch.nn.CrossEntropyLoss()
        self.net.train()
        for _ in range(cfg.epochs):
            order = torch.randperm(len(x), generator=gen)
            for start in range(0, len(x), cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                opt.zero_grad()
                logits, _ = self.net(x[idx])
                loss_fn(logits, y[idx]).backward()
                opt.step()
        self.net.eval()

    @torch.no_grad()
    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        if self.net is None:
            raise ConfigError(f"adapter {self.name!r} is not trained")
        logits, _ = self.net(self._to_tensor(images))
        return torch.softmax(logits, dim=1).double().numpy()

    def state_dict(self) -> dict:
        if self.net is None:
            raise ConfigError(f"adapter {self.name!r} is not trained")
        return {"n_classes": self.n_classes, "width": self.width,
                "weights": self.net.state_dict()}

    def load_state_dict(self, state: dict) -> None:
        self.n_classes = state["n_classes"]
        self.width = state["width"]
        self.net = _SmallCnn(self.n_classes, self.width)
        self.net.load_state_dict(state["weights"])
        self.net.eval()


class LinearAdapter(ClassifierAdapter):
    """Multinomial logistic regression on downsampled grayscale pixels."""

    def __init__(self, n_classes: int = 3, patch: int = 12, name: str = "linear"):
        self.name = name
        self.n_classes = n_classes
        self.patch = patch
        self.weights: np.ndarray | None = None

    def _features(self, images: np.ndarray) -> np.ndarray:
        rows = []
        for img in _check_images(images):
            gray = cv2.cvtColor(img, cv2.COLOR_RGB2GRAY)
            small = cv2.resize(gray, (self.patch, self.patch), interpolation=cv2.INTER_AREA)
            rows.append(small.astype(np.float64).reshape(-1) / 255.0)
        feats = np.stack(rows)
        return np.hstack([feats, np.ones((len(feats), 1))])  # bias column

    def train(self, images: np.ndarray, labels: np.ndarray, cfg: ClfTrainConfig) -> None:
        x = self._features(images)
        y = np.asarray(labels, dtype=np.int64)
        onehot = np.eye(self.n_classes)[y]
        w = np.zeros((x.shape[1], self.n_classes))
        lr = cfg.learning_rate
        for _ in range(cfg.epochs * 20):  # full-batch steps
            logits = x @ w
            logits -= logits.max(axis=1, keepdims=True)
            p = np.exp(logits)
            p /= p.sum(axis=1, keepdims=True)
            w -= lr * x.T @ (p - onehot) / len(x)
        self.weights = w

    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise ConfigError(f"adapter {self.name!r} is not trained")
        logits = self._features(images) @ self.weights
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        return p / p.sum(axis=1, keepdims=True)

    def state_dict(self) -> dict:
        return {"n_classes": self.n_classes, "patch": self.patch,
                "weights": None if self.weights is None else self.weights.tolist()}

    def load_state_dict(self, state: dict) -> None:
        self.n_classes = state["n_classes"]
        self.patch = state["patch"]
        self.weights = np.asarray(state["weights"]) if state["weights"] is not None else None


class ConstantPriorAdapter(ClassifierAdapter):
    """Predicts the training class prior for every input (chance baseline)."""

    def __init__(self, n_classes: int = 3, name: str = "prior"):
        self.name = name
        self.n_classes = n_classes
        self.prior: np.ndarray | None = None

    def train(self, images: np.ndarray, labels: np.ndarray, cfg: ClfTrainConfig) -> None:
        counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=self.n_classes)
        self.prior = counts / counts.sum()

    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        if self.prior is None:
            raise ConfigError(f"adapter {self.name!r} is not trained")
        return np.tile(self.prior, (len(_check_images(images)), 1))

    def state_dict(self) -> dict:
        return {"n_classes": self.n_classes,
                "prior": None if self.prior is None else self.prior.tolist()}

    def load_state_dict(self, state: dict) -> None:
        self.n_classes = state["n_classes"]
        self.prior = np.asarray(state["prior"]) if state["prior"] is not None else None


# torchvision constructor names for the pretrained backbones; weights load
# lazily and only when requested
_TORCHVISION_BACKBONES = {
    "densenet169": ("densenet169", "DenseNet169_Weights"),
    "resnet152v2": ("resnet152", "ResNet152_Weights"),
}


class TorchvisionAdapter(TinyCnnAdapter):
    """Fine-tunable pretrained backbone loaded by configuration name."""

    def __init__(self, backbone: str, n_classes: int = 3, pretrained: bool = False):
        if backbone not in _TORCHVISION_BACKBONES:
            raise ConfigError(
                f"backbone {backbone!r} has no torchvision constructor; "
                f"known: {sorted(_TORCHVISION_BACKBONES)}"
            )
        super().__init__(n_classes=n_classes, name=backbone)
        self.backbone = backbone
        self.pretrained = pretrained

    def _build(self) -> torch.nn.Module:
        import torchvision.models as models

        ctor_name, weights_name = _TORCHVISION_BACKBONES[self.backbone]
        ctor = getattr(models, ctor_name)
        weights = getattr(models, weights_name).DEFAULT if self.pretrained else None
        net = ctor(weights=weights, num_classes=1000 if self.pretrained else self.n_classes)
        if self.pretrained:
            # swap the classification head for our class count
            if hasattr(net, "fc"):
                net.fc = torch.nn.Linear(net.fc.in_features, self.n_classes)
            elif hasattr(net, "classifier"):
                net.classifier = torch.nn.Linear(net.classifier.in_features, self.n_classes)
        return net

    def train(self, images: np.ndarray, labels: np.ndarray, cfg: ClfTrainConfig) -> None:
        torch.manual_seed(cfg.seed)
        net = self._build()
        x = self._to_tensor(images)
        y = torch.as_tensor(np.asarray(labels), dtype=torch.long)
        gen = torch.Generator().manual_seed(cfg.seed)
        opt = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)
        loss_fn = torch.nn.CrossEntropyLoss()
        net.train()
        for _ in range(cfg.epochs):
            order = torch.randperm(len(x), generator=gen)
            for start in range(0, len(x), cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                opt.zero_grad()
                loss_fn(net(x[idx]), y[idx]).backward()
                opt.step()
        net.eval()
        self.net = net

    @torch.no_grad()
    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        if self.net is None:
            raise ConfigError(f"adapter {self.name!r} is not trained")
        logits = self.net(self._to_tensor(images))
        return torch.softmax(logits, dim=1).double().numpy()

    def state_dict(self) -> dict:
        if self.net is None:
            raise ConfigError(f"adapter {self.name!r} is not trained")
        return {"backbone": self.backbone, "n_classes": self.n_classes,
                "pretrained": self.pretrained, "weights": self.net.state_dict()}

    def load_state_dict(self, state: dict) -> None:
        self.backbone = state["backbone"]
        self.n_classes = state["n_classes"]
        self.pretrained = state["pretrained"]
        net = self._build()
        net.load_state_dict(state["weights"])
        net.eval()
        self.net = net


# Table-style backbone names accepted as adapter configuration strings
PRETRAINED_BACKBONE_NAMES = ("densenet169", "resnet152v2", "inception_resnet_v2")


def make_adapter(name: str, n_classes: int = 3, **kwargs) -> ClassifierAdapter:
    if name == "tiny_cnn":
        return TinyCnnAdapter(n_classes=n_classes, **kwargs)
    if name == "linear":
        return LinearAdapter(n_classes=n_classes, **kwargs)
    if name == "prior":
        return ConstantPriorAdapter(n_classes=n_classes, **kwargs)
    if name in PRETRAINED_BACKBONE_NAMES:
        return TorchvisionAdapter(name, n_classes=n_classes, **kwargs)
    raise ConfigError(f"unknown classifier adapter {name!r}")
