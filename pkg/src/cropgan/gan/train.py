"""Training loops for the paired and unpaired translators."""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from ..errors import ConfigError, NumericalError
from .losses import (
    adversarial_loss_terms,
    cycle_consistency_loss,
    cycle_gan_loss,
    cycle_total_objective,
    pix2pix_l1_loss,
    pix2pix_total_loss,
)
from .nets import (
    DiscriminatorSpec,
    GeneratorSpec,
    make_discriminator,
    make_generator,
)


@dataclass
class GanTrainConfig:
    model: str = "pix2pix"  # or "cyclegan"
    learning_rate: float = 2e-4
    batch_size: int = 8
    epochs: int = 130
    beta1: float = 0.5
    beta2: float = 0.999
    lambda_weight: float = 100.0
    seed: int = 0
    image_size: int = 224
    base_channels: int = 64
    depth: int = 8
    n_blocks: int = 9
    d_base_channels: int = 64
    least_squares: bool = False
    identity_init: bool = False
    checkpoint_every: int = 1

    def __post_init__(self):
        if self.model not in ("pix2pix", "cyclegan"):
            raise ConfigError(f"unknown GAN model {self.model!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.lambda_weight < 0:
            raise ConfigError("lambda weight must be >= 0")
        if self.batch_size <= 0 or self.epochs <= 0:
            raise ConfigError("batch_size and epochs must be positive")


def pix2pix_defaults(**overrides) -> GanTrainConfig:
    """Tuned paired-translation settings: lr 2e-4, batch 8, 130 epochs."""
    cfg = {"model": "pix2pix", "learning_rate": 2e-4, "epochs": 130,
           "lambda_weight": 100.0}
    cfg.update(overrides)
    return GanTrainConfig(**cfg)


def cyclegan_defaults(**overrides) -> GanTrainConfig:
    """Tuned unpaired-translation settings: lr 1e-5, batch 8, 70 epochs."""
    cfg = {"model": "cyclegan", "learning_rate": 1e-5, "epochs": 70,
           "lambda_weight": 10.0}
    cfg.update(overrides)
    return GanTrainConfig(**cfg)


@dataclass
class LossBreakdown:
    epoch: int
    step: int
    adv_d: float
    adv_g: float
    recon: float  # L1 term (paired) or cycle term (unpaired)
    total: float


def history_to_csv(history: list[LossBreakdown], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "step", "adv_D", "adv_G", "recon", "total"])
        for row in history:
            writer.writerow([row.epoch, row.step, repr(row.adv_d), repr(row.adv_g),
                             repr(row.recon), repr(row.total)])


def epoch_mean(history: list[LossBreakdown], epoch: int, attr: str = "recon") -> float:
    values = [getattr(h, attr) for h in history if h.epoch == epoch]
    return float(np.mean(values))


def images_to_tensor(images: list[np.ndarray] | np.ndarray) -> torch.Tensor:
    """uint8 HxWx3 images -> float tensor batch in [-1, 1]."""
    arr = np.stack([np.asarray(im) for im in images]).astype(np.float32)
    arr = arr / 127.5 - 1.0
    return torch.from_numpy(arr).permute(0, 3, 1, 2).contiguous()


def tensor_to_images(batch: torch.Tensor) -> np.ndarray:
    arr = batch.detach().permute(0, 2, 3, 1).numpy()
    return np.clip(np.rint((arr + 1.0) * 127.5), 0, 255).astype(np.uint8)


def save_checkpoint(payload: dict, path: str | Path) -> None:
    """Atomic write: serialize to a temp file, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            torch.save(payload, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str | Path) -> dict:
    return torch.load(path, map_location="cpu", weights_only=False)


def _check_finite(value: torch.Tensor, what: str, epoch: int, step: int) -> None:
    if not torch.isfinite(value):
        raise NumericalError(f"non-finite {what} loss at epoch {epoch} step {step}")


def _generator_spec(cfg: GanTrainConfig, kind: str) -> GeneratorSpec:
    return GeneratorSpec(
        kind=kind, image_size=cfg.image_size, base_channels=cfg.base_channels,
        depth=cfg.depth, n_blocks=cfg.n_blocks, identity_residual=cfg.identity_init,
    )


def train_pix2pix(pairs: list[tuple[np.ndarray, np.ndarray]], cfg: GanTrainConfig,
                  out_dir: str | Path | None = None, disease: str = "disease"
                  ) -> tuple[dict, list[LossBreakdown]]:
    """Alternating D/G updates on (healthy input, diseased target) pairs.

    Returns the final checkpoint payload and the per-step loss history.
    Checkpoints land under out_dir/epoch-<n>.pt when out_dir is given.
    """
    if not pairs:
        raise ConfigError("train_pix2pix needs at least one image pair")
    torch.manual_seed(cfg.seed)
    g_spec = _generator_spec(cfg, "pix2pix_unet")
    d_spec = DiscriminatorSpec(base_channels=cfg.d_base_channels, conditional=True)
    gen = make_generator(g_spec)
    dis = make_discriminator(d_spec)
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.learning_rate,
                             betas=(cfg.beta1, cfg.beta2))
    opt_d = torch.optim.Adam(dis.parameters(), lr=cfg.learning_rate,
                             betas=(cfg.beta1, cfg.beta2))

    inputs = images_to_tensor([p[0] for p in pairs])
    targets = images_to_tensor([p[1] for p in pairs])
    shuffler = torch.Generator().manual_seed(cfg.seed)

    history: list[LossBreakdown] = []
    checkpoint: dict = {}
    gen.train()
    dis.train()
    for epoch in range(cfg.epochs):
        order = torch.randperm(len(pairs), generator=shuffler)
        for step, start in enumerate(range(0, len(pairs), cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            x, y = inputs[idx], targets[idx]

            fake = gen(x)
            opt_d.zero_grad()
            loss_d, _ = adversarial_loss_terms(dis(y, x), dis(fake.detach(), x))
            _check_finite(loss_d, "discriminator", epoch, step)
            loss_d.backward()
            opt_d.step()

            opt_g.zero_grad()
            _, adv_g = adversarial_loss_terms(dis(y, x), dis(fake, x))
            l1 = pix2pix_l1_loss(y, fake)
            total = pix2pix_total_loss(adv_g, l1, cfg.lambda_weight)
            _check_finite(total, "generator", epoch, step)
            total.backward()
            opt_g.step()

            history.append(LossBreakdown(
                epoch, step, float(loss_d.detach()), float(adv_g.detach()),
                float(l1.detach()), float(total.detach())))
        checkpoint = {
            "kind": "pix2pix",
            "disease": disease,
            "generator": gen.state_dict(),
            "discriminator": dis.state_dict(),
            "generator_spec": asdict(g_spec),
            "cfg": asdict(cfg),
            "epoch": epoch,
            "torch_rng_state": torch.get_rng_state(),
        }
        if out_dir is not None and (epoch + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(checkpoint, Path(out_dir) / f"epoch-{epoch}.pt")
    return checkpoint, history


def train_cyclegan(domain_healthy: list[np.ndarray], domain_diseased: list[np.ndarray],
                   cfg: GanTrainConfig, out_dir: str | Path | None = None,
                   disease: str = "disease") -> tuple[dict, list[LossBreakdown]]:
    """Unpaired training: update D_X and D_Y, then both generators jointly.

    G maps healthy -> diseased, F maps back. The recorded adversarial
    generator term is the sum over both directions.
    """
    if not domain_healthy or not domain_diseased:
        raise ConfigError("train_cyclegan needs non-empty healthy and diseased domains")
    torch.manual_seed(cfg.seed)
    g_spec = _generator_spec(cfg, "cyclegan_resnet")
    d_spec = DiscriminatorSpec(base_channels=cfg.d_base_channels, conditional=False)
    gen_g = make_generator(g_spec)   # healthy -> diseased
    gen_f = make_generator(g_spec)   # diseased -> healthy
    dis_x = make_discriminator(d_spec)  # judges healthy domain
    dis_y = make_discriminator(d_spec)  # judges diseased domain
    params_g = list(gen_g.parameters()) + list(gen_f.parameters())
    opt_g = torch.optim.Adam(params_g, lr=cfg.learning_rate, betas=(cfg.beta1, cfg.beta2))
    opt_d = torch.optim.Adam(
        list(dis_x.parameters()) + list(dis_y.parameters()),
        lr=cfg.learning_rate, betas=(cfg.beta1, cfg.beta2))

    xs = images_to_tensor(domain_healthy)
    ys = images_to_tensor(domain_diseased)
    shuffler = torch.Generator().manual_seed(cfg.seed)
    n_batches = max((len(xs) + cfg.batch_size - 1) // cfg.batch_size,
                    (len(ys) + cfg.batch_size - 1) // cfg.batch_size)

    history: list[LossBreakdown] = []
    checkpoint: dict = {}
    for net in (gen_g, gen_f, dis_x, dis_y):
        net.train()
    for epoch in range(cfg.epochs):
        x_order = torch.randperm(len(xs), generator=shuffler)
        y_order = torch.randperm(len(ys), generator=shuffler)
        for step in range(n_batches):
            x_idx = x_order[(step * cfg.batch_size + torch.arange(cfg.batch_size)) % len(xs)]
            y_idx = y_order[(step * cfg.batch_size + torch.arange(cfg.batch_size)) % len(ys)]
            x, y = xs[x_idx], ys[y_idx]

            fake_y = gen_g(x)
            fake_x = gen_f(y)

            opt_d.zero_grad()
            loss_dy, _ = cycle_gan_loss(dis_y(y), dis_y(fake_y.detach()), cfg.least_squares)
            loss_dx, _ = cycle_gan_loss(dis_x(x), dis_x(fake_x.detach()), cfg.least_squares)
            loss_d = loss_dy + loss_dx
            _check_finite(loss_d, "discriminator", epoch, step)
            loss_d.backward()
            opt_d.step()

            opt_g.zero_grad()
            _, adv_g = cycle_gan_loss(dis_y(y), dis_y(fake_y), cfg.least_squares)
            _, adv_f = cycle_gan_loss(dis_x(x), dis_x(fake_x), cfg.least_squares)
            cyc = cycle_consistency_loss(x, gen_f(fake_y), y, gen_g(fake_x))
            total = cycle_total_objective(adv_g, adv_f, cyc, cfg.lambda_weight)
            _check_finite(total, "generator", epoch, step)
            total.backward()
            opt_g.step()

            history.append(LossBreakdown(
                epoch, step, float(loss_d.detach()), float((adv_g + adv_f).detach()),
                float(cyc.detach()), float(total.detach())))
        checkpoint = {
            "kind": "cyclegan",
            "disease": disease,
            "generator": gen_g.state_dict(),
            "generator_reverse": gen_f.state_dict(),
            "discriminator_x": dis_x.state_dict(),
            "discriminator_y": dis_y.state_dict(),
            "generator_spec": asdict(g_spec),
            "cfg": asdict(cfg),
            "epoch": epoch,
            "torch_rng_state": torch.get_rng_state(),
        }
        if out_dir is not None and (epoch + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(checkpoint, Path(out_dir) / f"epoch-{epoch}.pt")
    return checkpoint, history
