"""Model boundary for the CAM explainers: activations, gradients, scores."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..errors import ConfigError, ShapeError


class DifferentiableModel:
    """What an explainer needs from a classifier.

    All methods take a single (H, W, 3) uint8 image; activations and
    gradients come back as (K, h, w) arrays for the requested layer.
    """

    def forward(self, image: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def activations(self, image: np.ndarray, layer: str) -> np.ndarray:
        raise NotImplementedError

    def grad_of_score(self, image: np.ndarray, layer: str, class_index: int) -> np.ndarray:
        raise NotImplementedError

    def masked_forward(self, images: np.ndarray) -> np.ndarray:
        """Batch of already-masked float images (n, H, W, 3) -> (n, C) scores."""
        raise NotImplementedError

    @property
    def n_classes(self) -> int:
        raise NotImplementedError


def _to_input(image: np.ndarray) -> torch.Tensor:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError(f"expected an (H, W, 3) image, got {image.shape}")
    arr = image.astype(np.float32) / 127.5 - 1.0
    return torch.from_numpy(arr).permute(2, 0, 1).unsqueeze(0)


class TorchModel(DifferentiableModel):
    """Hook-based adapter around any torch classifier module."""

    def __init__(self, net: nn.Module, out_classes: int | None = None):
        self.net = net.eval()
        self._classes = out_classes
        self._dtype = next(net.parameters()).dtype

    def _module(self, layer: str) -> nn.Module:
        modules = dict(self.net.named_modules())
        if layer not in modules:
            conv_names = [n for n, m in modules.items() if isinstance(m, nn.Conv2d)]
            raise ConfigError(f"layer {layer!r} not found; conv layers: {conv_names}")
        return modules[layer]

    def default_layer(self) -> str:
        """Name of the last convolutional module (the usual CAM target)."""
        names = [n for n, m in self.net.named_modules() if isinstance(m, nn.Conv2d)]
        if not names:
            raise ConfigError("model has no convolutional layers")
        return names[-1]

    def _logits(self, x: torch.Tensor) -> torch.Tensor:
        out = self.net(x)
        if isinstance(out, tuple):
            out = out[0]
        return out

    @property
    def n_classes(self) -> int:
        if self._classes is None:
            with torch.no_grad():
                probe = self._logits(torch.zeros(1, 3, 32, 32, dtype=self._dtype))
            self._classes = probe.shape[1]
        return self._classes

    @torch.no_grad()
    def forward(self, image: np.ndarray) -> np.ndarray:
        return self._logits(_to_input(image).to(self._dtype))[0].double().numpy()

    def _run_with_hooks(self, image: np.ndarray, layer: str, class_index: int | None,
                        need_grad: bool) -> tuple[np.ndarray, np.ndarray | None]:
        module = self._module(layer)
        store: dict = {}

        def fwd_hook(_m, _inp, out):
            store["act"] = out
            if need_grad:
                out.retain_grad()

        handle = module.register_forward_hook(fwd_hook)
        try:
            x = _to_input(image).to(self._dtype)
            logits = self._logits(x)
            if "act" not in store:
                raise ConfigError(f"layer {layer!r} produced no activation")
            act = store["act"]
            if act.ndim != 4:
                raise ConfigError(f"layer {layer!r} output is not spatial (shape {tuple(act.shape)})")
            if act.shape[2] == 1 and act.shape[3] == 1 and act.shape[1] == logits.shape[1]:
                raise ConfigError(
                    "layer looks like the classifier head; choose a convolutional layer")
            grads = None
            if need_grad:
                if class_index is None:
                    class_index = int(logits[0].argmax())
                self.net.zero_grad(set_to_none=True)
                logits[0, class_index].backward()
                grads = act.grad[0].detach().double().numpy()
            return act[0].detach().double().numpy(), grads
        finally:
            handle.remove()

    def activations(self, image: np.ndarray, layer: str) -> np.ndarray:
        act, _ = self._run_with_hooks(image, layer, None, need_grad=False)
        return act

    def grad_of_score(self, image: np.ndarray, layer: str, class_index: int) -> np.ndarray:
        _, grads = self._run_with_hooks(image, layer, class_index, need_grad=True)
        return grads

    def activations_and_grads(self, image: np.ndarray, layer: str,
                              class_index: int | None) -> tuple[np.ndarray, np.ndarray]:
        return self._run_with_hooks(image, layer, class_index, need_grad=True)

    @torch.no_grad()
    def masked_forward(self, images: np.ndarray) -> np.ndarray:
        arr = np.asarray(images, dtype=np.float32)
        if arr.ndim != 4:
            raise ShapeError(f"masked_forward wants a batch, got shape {arr.shape}")
        x = torch.from_numpy(arr / 127.5 - 1.0).permute(0, 3, 1, 2).to(self._dtype)
        return self._logits(x).double().numpy()
