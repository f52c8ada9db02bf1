from .types import (
    DISEASE_LABELS,
    DatasetManifest,
    ImagePair,
    ImageSample,
    Label,
    MaskAnnotation,
    Provenance,
    Split,
)
from .manifest import load_manifest, pair_images, split_dataset
from .preprocess import PreprocessConfig, preprocess, preprocess_pixels, contrast_stretch
from .augment import augment
from .annotations import export_coco, import_coco, import_vgg_annotations, rasterize
from .synthetic import generate_corpus, write_corpus

__all__ = [
    "DISEASE_LABELS",
    "DatasetManifest",
    "ImagePair",
    "ImageSample",
    "Label",
    "MaskAnnotation",
    "PreprocessConfig",
    "Provenance",
    "Split",
    "augment",
    "contrast_stretch",
    "export_coco",
    "generate_corpus",
    "import_coco",
    "import_vgg_annotations",
    "load_manifest",
    "pair_images",
    "preprocess",
    "preprocess_pixels",
    "rasterize",
    "split_dataset",
    "write_corpus",
]
