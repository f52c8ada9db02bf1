import numpy as np
import pytest

from cropgan.data import ImageSample, Label, PreprocessConfig, contrast_stretch, preprocess
from cropgan.data.preprocess import preprocess_pixels
from cropgan.errors import DatasetError


def _sample(pixels):
    return ImageSample(id="healthy/x", label=Label.HEALTHY, pixels=pixels)


def test_resizes_to_224():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (480, 640, 3), dtype=np.uint8)
    out = preprocess(_sample(img))
    assert out.pixels.shape == (224, 224, 3)
    assert out.provenance.value == "preprocessed"


def test_constant_image_is_fixed_point_up_to_quantization():
    img = np.full((224, 224, 3), 128, np.uint8)
    out = preprocess_pixels(img, PreprocessConfig())
    # still constant, and within histogram-equalization quantization drift
    for c in range(3):
        assert len(np.unique(out[:, :, c])) == 1
    assert np.abs(out.astype(int) - 128).max() <= 2


def test_contrast_stretch_spans_full_range_on_step_image():
    img = np.full((64, 64, 3), 40, np.uint8)
    img[:, 32:] = 200
    out = contrast_stretch(img, 2.0, 98.0)
    assert out.min() == 0
    assert out.max() == 255


def test_contrast_stretch_noop_on_constant():
    img = np.full((16, 16, 3), 99, np.uint8)
    assert np.array_equal(contrast_stretch(img, 2.0, 98.0), img)


def test_shape_idempotent():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (300, 200, 3), dtype=np.uint8)
    cfg = PreprocessConfig()
    once = preprocess_pixels(img, cfg)
    twice = preprocess_pixels(once, cfg)
    assert once.shape == twice.shape == (224, 224, 3)


def test_degenerate_inputs_rejected():
    with pytest.raises(DatasetError):
        preprocess(_sample(np.zeros((1, 1, 3), np.uint8)))
    with pytest.raises(DatasetError):
        ImageSample(id="x", label=Label.HEALTHY, pixels=np.zeros((32, 32), np.uint8))


def test_invalid_config_rejected():
    with pytest.raises(DatasetError):
        PreprocessConfig(stretch_low_percentile=98.0, stretch_high_percentile=2.0)
    with pytest.raises(DatasetError):
        PreprocessConfig(clahe_clip_limit=0.0)
