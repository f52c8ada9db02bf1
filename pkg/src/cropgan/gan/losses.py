"""Adversarial, reconstruction and cycle objectives for both translators."""

from __future__ import annotations

import torch

from ..errors import ShapeError

SCORE_EPS = 1e-7


def _as_tensor(x) -> torch.Tensor:
    return x if isinstance(x, torch.Tensor) else torch.as_tensor(x, dtype=torch.float64)


def clamp_scores(d: torch.Tensor) -> torch.Tensor:
    """Keep discriminator scores strictly inside (0, 1) so logs stay finite."""
    return _as_tensor(d).clamp(SCORE_EPS, 1.0 - SCORE_EPS)


def adversarial_loss_terms(d_real: torch.Tensor, d_fake: torch.Tensor
                           ) -> tuple[torch.Tensor, torch.Tensor]:
    """Cross-entropy GAN terms on score grids.

    loss_D = -mean[log d_real + log(1 - d_fake)]; the generator term is
    the non-saturating form -mean[log d_fake].
    """
    d_real = clamp_scores(d_real)
    d_fake = clamp_scores(d_fake)
    loss_d = -(torch.log(d_real).mean() + torch.log(1.0 - d_fake).mean())
    loss_g = -torch.log(d_fake).mean()
    return loss_d, loss_g


def least_squares_loss_terms(d_real: torch.Tensor, d_fake: torch.Tensor
                             ) -> tuple[torch.Tensor, torch.Tensor]:
    """Least-squares variant on the squashed scores (training stability flag)."""
    d_real = _as_tensor(d_real)
    d_fake = _as_tensor(d_fake)
    loss_d = ((d_real - 1.0) ** 2).mean() + (d_fake ** 2).mean()
    loss_g = ((d_fake - 1.0) ** 2).mean()
    return loss_d, loss_g


def pix2pix_gan_loss(d_real: torch.Tensor, d_fake: torch.Tensor
                     ) -> tuple[torch.Tensor, torch.Tensor]:
    """Conditional adversarial terms; the discriminator saw (x, y) pairs."""
    return adversarial_loss_terms(d_real, d_fake)


def pix2pix_l1_loss(target: torch.Tensor, generated: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference over pixels and channels ([-1, 1] images)."""
    target = _as_tensor(target)
    generated = _as_tensor(generated)
    if target.shape != generated.shape:
        raise ShapeError(f"image shapes differ: {tuple(target.shape)} vs {tuple(generated.shape)}")
    return (target - generated).abs().mean()


def pix2pix_total_loss(adv_g, l1, lam: float):
    """adv_G + lambda * L1."""
    if lam < 0:
        raise ShapeError(f"lambda must be >= 0, got {lam}")
    return adv_g + lam * l1


def cycle_gan_loss(d_real: torch.Tensor, d_fake: torch.Tensor,
                   least_squares: bool = False) -> tuple[torch.Tensor, torch.Tensor]:
    """Unconditional adversarial terms for one translation direction."""
    if least_squares:
        return least_squares_loss_terms(d_real, d_fake)
    return adversarial_loss_terms(d_real, d_fake)


def cycle_consistency_loss(x: torch.Tensor, x_rec: torch.Tensor,
                           y: torch.Tensor, y_rec: torch.Tensor) -> torch.Tensor:
    """mean|F(G(x)) - x| + mean|G(F(y)) - y|."""
    x, x_rec, y, y_rec = map(_as_tensor, (x, x_rec, y, y_rec))
    if x.shape != x_rec.shape or y.shape != y_rec.shape:
        raise ShapeError("round-trip reconstructions must match their originals in shape")
    return (x_rec - x).abs().mean() + (y_rec - y).abs().mean()


def cycle_total_objective(adv_g, adv_f, cyc, lam: float):
    """adv_G + adv_F + lambda * cycle term."""
    if lam < 0:
        raise ShapeError(f"lambda must be >= 0, got {lam}")
    return adv_g + adv_f + lam * cyc
