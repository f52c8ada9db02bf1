from .losses import (
    adversarial_loss_terms,
    clamp_scores,
    cycle_consistency_loss,
    cycle_gan_loss,
    cycle_total_objective,
    least_squares_loss_terms,
    pix2pix_gan_loss,
    pix2pix_l1_loss,
    pix2pix_total_loss,
)
from .nets import (
    DiscriminatorSpec,
    GeneratorSpec,
    PatchDiscriminator,
    ResnetGenerator,
    UnetGenerator,
    make_discriminator,
    make_generator,
)
from .train import (
    GanTrainConfig,
    LossBreakdown,
    cyclegan_defaults,
    epoch_mean,
    history_to_csv,
    images_to_tensor,
    load_checkpoint,
    pix2pix_defaults,
    save_checkpoint,
    tensor_to_images,
    train_cyclegan,
    train_pix2pix,
)
from .translate import load_generator, mean_abs_diff, translate

__all__ = [
    "DiscriminatorSpec",
    "GanTrainConfig",
    "GeneratorSpec",
    "LossBreakdown",
    "PatchDiscriminator",
    "ResnetGenerator",
    "UnetGenerator",
    "adversarial_loss_terms",
    "clamp_scores",
    "cycle_consistency_loss",
    "cycle_gan_loss",
    "cycle_total_objective",
    "cyclegan_defaults",
    "epoch_mean",
    "history_to_csv",
    "images_to_tensor",
    "least_squares_loss_terms",
    "load_checkpoint",
    "load_generator",
    "make_discriminator",
    "make_generator",
    "mean_abs_diff",
    "pix2pix_defaults",
    "pix2pix_gan_loss",
    "pix2pix_l1_loss",
    "pix2pix_total_loss",
    "save_checkpoint",
    "tensor_to_images",
    "train_cyclegan",
    "train_pix2pix",
    "translate",
]
