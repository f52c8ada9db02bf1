"""Composite generation scoring: extract, fit, FID + inception score."""

from __future__ import annotations

import numpy as np

from ..errors import NumericalError
from .extractors import FeatureExtractor
from .inception import inception_score
from .stats import fid, fit_gaussian


def score_generation(real_images: np.ndarray, gen_images: np.ndarray,
                     extractor: FeatureExtractor, splits: int = 1) -> dict:
    """Score a generated set against a real set with one extractor.

    Returns the report row used by the pipeline's generation table.
    """
    real_images = np.asarray(real_images)
    gen_images = np.asarray(gen_images)
    if len(real_images) < 2 or len(gen_images) < 2:
        raise NumericalError("need at least 2 real and 2 generated images for FID")
    real_stats = fit_gaussian(extractor.embed(real_images))
    gen_stats = fit_gaussian(extractor.embed(gen_images))
    is_mean, is_std = inception_score(extractor.classify(gen_images), splits=splits)
    return {
        "fid": fid(real_stats, gen_stats),
        "is_mean": is_mean,
        "is_std": is_std,
        "n_real": int(len(real_images)),
        "n_gen": int(len(gen_images)),
        "extractor_name": extractor.name,
    }
