"""Generator and discriminator architectures for both translators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from ..errors import ConfigError


@dataclass
class GeneratorSpec:
    kind: str = "pix2pix_unet"  # or "cyclegan_resnet"
    image_size: int = 224
    base_channels: int = 64
    depth: int = 8          # unet down/up levels
    n_blocks: int = 9       # resnet residual blocks
    noise_mode: bool = True  # dropout acts as the z source at train time
    identity_residual: bool = False

    def __post_init__(self):
        if self.kind not in ("pix2pix_unet", "cyclegan_resnet"):
            raise ConfigError(f"unknown generator kind {self.kind!r}")
        if self.image_size < 8:
            raise ConfigError("image_size must be >= 8")


@dataclass
class DiscriminatorSpec:
    kind: str = "patch"
    base_channels: int = 64
    n_layers: int = 3       # 3 layers -> 70x70 receptive field
    conditional: bool = False

    def __post_init__(self):
        if self.kind != "patch":
            raise ConfigError(f"unknown discriminator kind {self.kind!r}")


def _norm(channels: int) -> nn.Module:
    return nn.InstanceNorm2d(channels, affine=True)


class _UnetBlock(nn.Module):
    """One encoder/decoder level with a skip connection around its inner block."""

    def __init__(self, outer_ch: int, inner_ch: int, submodule: nn.Module | None,
                 outermost: bool = False, innermost: bool = False,
                 dropout: bool = False):
        super().__init__()
        self.outermost = outermost
        down_conv = nn.Conv2d(outer_ch, inner_ch, 4, stride=2, padding=1)
        if outermost:
            down = [down_conv]
            up = [nn.ReLU(True),
                  nn.ConvTranspose2d(inner_ch * 2, outer_ch, 4, stride=2, padding=1)]
        elif innermost:
            down = [nn.LeakyReLU(0.2, True), down_conv]
            up = [nn.ReLU(True),
                  nn.ConvTranspose2d(inner_ch, outer_ch, 4, stride=2, padding=1),
                  _norm(outer_ch)]
        else:
            down = [nn.LeakyReLU(0.2, True), down_conv, _norm(inner_ch)]
            up = [nn.ReLU(True),
                  nn.ConvTranspose2d(inner_ch * 2, outer_ch, 4, stride=2, padding=1),
                  _norm(outer_ch)]
            if dropout:
                up.append(nn.Dropout(0.5))
        inner = [submodule] if submodule is not None else []
        self.model = nn.Sequential(*down, *inner, *up)

    def forward(self, x):
        if self.outermost:
            return self.model(x)
        return torch.cat([x, self.model(x)], dim=1)


class UnetGenerator(nn.Module):
    """Encoder-decoder with skips; inputs pad up to a power-of-two grid.

    With identity_residual the final layer is zero-initialized and added
    onto the input, so a fresh generator is exactly the identity map.
    """

    def __init__(self, spec: GeneratorSpec, in_channels: int = 3, out_channels: int = 3):
        super().__init__()
        self.spec = spec
        # never downsample past a 1x1 bottleneck on the padded grid
        next_pow2 = int(math.ceil(math.log2(spec.image_size)))
        depth = max(2, min(spec.depth, next_pow2))
        self.depth = depth
        base = spec.base_channels

        def width(level: int) -> int:
            return base * min(2 ** level, 8)

        block = _UnetBlock(width(depth - 2), width(depth - 1), None, innermost=True)
        for level in range(depth - 2, 0, -1):
            use_dropout = spec.noise_mode and level >= depth - 4
            block = _UnetBlock(width(level - 1), width(level), block, dropout=use_dropout)
        self.encoder_decoder = _UnetBlock(base, width(0), block, outermost=True)
        self.stem = nn.Conv2d(in_channels, base, 3, padding=1)
        self.head = nn.Conv2d(base, out_channels, 3, padding=1)
        if spec.identity_residual:
            nn.init.zeros_(self.head.weight)
            nn.init.zeros_(self.head.bias)

    def forward(self, x):
        h, w = x.shape[2], x.shape[3]
        unit = 2 ** self.depth
        pad_h = (unit - h % unit) % unit
        pad_w = (unit - w % unit) % unit
        padded = nn.functional.pad(
            x, (0, pad_w, 0, pad_h),
            mode="reflect" if max(pad_h, pad_w) < min(h, w) else "replicate")
        features = self.encoder_decoder(self.stem(padded))
        out = self.head(features)[:, :, :h, :w]
        if self.spec.identity_residual:
            return (x + out).clamp(-1.0, 1.0)
        return torch.tanh(out)


class _ResidualBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            _norm(channels),
            nn.ReLU(True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            _norm(channels),
        )

    def forward(self, x):
        return x + self.block(x)


class ResnetGenerator(nn.Module):
    """Residual-block generator: downsample twice, transform, upsample."""

    def __init__(self, spec: GeneratorSpec, in_channels: int = 3, out_channels: int = 3):
        super().__init__()
        self.spec = spec
        base = spec.base_channels
        layers: list[nn.Module] = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(in_channels, base, 7),
            _norm(base),
            nn.ReLU(True),
        ]
        for mult in (1, 2):
            layers += [
                nn.Conv2d(base * mult, base * mult * 2, 3, stride=2, padding=1),
                _norm(base * mult * 2),
                nn.ReLU(True),
            ]
        for _ in range(spec.n_blocks):
            layers.append(_ResidualBlock(base * 4))
        if spec.noise_mode:
            layers.append(nn.Dropout(0.3))
        for mult in (4, 2):
            layers += [
                nn.ConvTranspose2d(base * mult, base * mult // 2, 3, stride=2,
                                   padding=1, output_padding=1),
                _norm(base * mult // 2),
                nn.ReLU(True),
            ]
        layers += [nn.ReflectionPad2d(3)]
        self.body = nn.Sequential(*layers)
        self.head = nn.Conv2d(base, out_channels, 7)
        if spec.identity_residual:
            nn.init.zeros_(self.head.weight)
            nn.init.zeros_(self.head.bias)

    def forward(self, x):
        out = self.head(self.body(x))
        if self.spec.identity_residual:
            return (x + out).clamp(-1.0, 1.0)
        return torch.tanh(out)


class PatchDiscriminator(nn.Module):
    """Patch-wise real/fake scorer; outputs a sigmoid score grid."""

    def __init__(self, spec: DiscriminatorSpec, in_channels: int = 3):
        super().__init__()
        channels = in_channels * 2 if spec.conditional else in_channels
        base = spec.base_channels
        layers: list[nn.Module] = [
            nn.Conv2d(channels, base, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, True),
        ]
        mult = 1
        for _ in range(1, spec.n_layers):
            prev, mult = mult, min(mult * 2, 8)
            layers += [
                nn.Conv2d(base * prev, base * mult, 4, stride=2, padding=1),
                _norm(base * mult),
                nn.LeakyReLU(0.2, True),
            ]
        prev, mult = mult, min(mult * 2, 8)
        layers += [
            nn.Conv2d(base * prev, base * mult, 4, stride=1, padding=1),
            _norm(base * mult),
            nn.LeakyReLU(0.2, True),
            nn.Conv2d(base * mult, 1, 4, stride=1, padding=1),
            nn.Sigmoid(),
        ]
        self.model = nn.Sequential(*layers)
        self.conditional = spec.conditional

    def forward(self, image, condition=None):
        if self.conditional:
            if condition is None:
                raise ConfigError("conditional discriminator needs the input image")
            image = torch.cat([condition, image], dim=1)
        return self.model(image)


def make_generator(spec: GeneratorSpec) -> nn.Module:
    if spec.kind == "pix2pix_unet":
        return UnetGenerator(spec)
    return ResnetGenerator(spec)


def make_discriminator(spec: DiscriminatorSpec) -> nn.Module:
    return PatchDiscriminator(spec)
