from .stats import (
    FeatureStats,
    fid,
    fit_gaussian,
    matrix_sqrt_psd,
    trace_sqrt_product,
)
from .inception import inception_score, validate_prob_matrix
from .extractors import (
    FeatureExtractor,
    InceptionV3Extractor,
    RandomProjectionExtractor,
    TinyCnnExtractor,
    make_extractor,
)
from .scoring import score_generation

__all__ = [
    "FeatureExtractor",
    "FeatureStats",
    "InceptionV3Extractor",
    "RandomProjectionExtractor",
    "TinyCnnExtractor",
    "fid",
    "fit_gaussian",
    "inception_score",
    "make_extractor",
    "matrix_sqrt_psd",
    "score_generation",
    "trace_sqrt_product",
    "validate_prob_matrix",
]
