import numpy as np
import pytest

from cropgan.clf import (
    ClassificationDataset,
    ClassifierAdapter,
    ClfTrainConfig,
    ConstantPriorAdapter,
    LinearAdapter,
    TinyCnnAdapter,
    benchmark,
    make_adapter,
)
from cropgan.errors import ConfigError


def separable_dataset(n_per_class=12, size=24, seed=0):
    """Dark images are class 0, bright images class 1: linearly separable."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for i in range(n_per_class):
        dark = rng.integers(10, 70, (size, size, 3)).astype(np.uint8)
        bright = rng.integers(180, 250, (size, size, 3)).astype(np.uint8)
        images += [dark, bright]
        labels += [0, 1]
    images = np.stack(images)
    labels = np.array(labels)
    n_train = int(0.75 * len(images))
    return ClassificationDataset(
        train_images=images[:n_train], train_labels=labels[:n_train],
        test_images=images[n_train:], test_labels=labels[n_train:],
        class_names=["dark", "bright"],
    )


def test_linear_adapter_separable_accuracy_one():
    dataset = separable_dataset()
    cfg = ClfTrainConfig(learning_rate=0.5, batch_size=8, epochs=10, seed=0)
    reports = benchmark([LinearAdapter(n_classes=2)], dataset, cfg)
    assert reports[0].status == "ok"
    assert reports[0].accuracy == 1.0


def test_prior_adapter_accuracy_equals_majority_share():
    rng = np.random.default_rng(1)
    images = rng.integers(0, 255, (40, 16, 16, 3), dtype=np.uint8)
    labels = np.array([0] * 24 + [1] * 16)
    dataset = ClassificationDataset(
        train_images=images[:30], train_labels=labels[:30],
        test_images=images[30:], test_labels=labels[30:],
        class_names=["a", "b"],
    )
    cfg = ClfTrainConfig(epochs=1)
    reports = benchmark([ConstantPriorAdapter(n_classes=2)], dataset, cfg)
    majority = max((dataset.test_labels == k).mean() for k in (0, 1))
    train_major = np.bincount(dataset.train_labels).argmax()
    expected = float((dataset.test_labels == train_major).mean())
    assert reports[0].accuracy == pytest.approx(expected)
    assert expected <= majority + 1e-12


def test_reports_preserve_input_order_and_isolate_failures():
    class ExplodingAdapter(ClassifierAdapter):
        name = "boom"

        def train(self, images, labels, cfg):
            raise RuntimeError("synthetic failure")

    dataset = separable_dataset()
    cfg = ClfTrainConfig(learning_rate=0.5, batch_size=8, epochs=4, seed=0)
    adapters = [LinearAdapter(n_classes=2, name="first"), ExplodingAdapter(),
                LinearAdapter(n_classes=2, name="third")]
    reports = benchmark(adapters, dataset, cfg)
    assert [r.name for r in reports] == ["first", "boom", "third"]
    assert [r.status for r in reports] == ["ok", "failed", "ok"]
    assert "synthetic failure" in reports[1].error


def test_tiny_cnn_learns_separable():
    dataset = separable_dataset()
    cfg = ClfTrainConfig(learning_rate=1e-2, batch_size=8, epochs=6, seed=3)
    reports = benchmark([TinyCnnAdapter(n_classes=2, width=8)], dataset, cfg)
    assert reports[0].status == "ok"
    assert reports[0].accuracy >= 0.9


def test_benchmark_deterministic_given_seed():
    dataset = separable_dataset()
    cfg = ClfTrainConfig(learning_rate=1e-2, batch_size=8, epochs=3, seed=7)
    r1 = benchmark([TinyCnnAdapter(n_classes=2, width=8)], dataset, cfg)
    r2 = benchmark([TinyCnnAdapter(n_classes=2, width=8)], dataset, cfg)
    assert r1[0].to_dict() == r2[0].to_dict()


def test_adapter_state_round_trip():
    dataset = separable_dataset()
    cfg = ClfTrainConfig(learning_rate=1e-2, batch_size=8, epochs=2, seed=0)
    adapter = TinyCnnAdapter(n_classes=2, width=8)
    adapter.train(dataset.train_images, dataset.train_labels, cfg)
    probs = adapter.predict_proba(dataset.test_images)
    clone = TinyCnnAdapter(n_classes=2, width=8)
    clone.load_state_dict(adapter.state_dict())
    assert np.allclose(clone.predict_proba(dataset.test_images), probs)


def test_make_adapter_names():
    assert make_adapter("tiny_cnn", n_classes=3).name == "tiny_cnn"
    assert make_adapter("linear").name == "linear"
    assert make_adapter("prior").name == "prior"
    assert make_adapter("densenet169", n_classes=3).name == "densenet169"
    with pytest.raises(ConfigError, match="unknown classifier adapter"):
        make_adapter("vgg19")
    with pytest.raises(ConfigError, match="no torchvision constructor"):
        make_adapter("inception_resnet_v2")
