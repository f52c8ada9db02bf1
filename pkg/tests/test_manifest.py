import numpy as np
import pytest

from cropgan.data import (
    DatasetManifest,
    ImageSample,
    Label,
    Provenance,
    Split,
    load_manifest,
    pair_images,
    split_dataset,
    write_corpus,
)
from cropgan.errors import DatasetError


def _samples(label, n, prefix=None):
    prefix = prefix or label.value
    rng = np.random.default_rng(0)
    return [
        ImageSample(
            id=f"{prefix}/{i:03d}",
            label=label,
            pixels=rng.integers(0, 256, (8, 8, 3), dtype=np.uint8),
        )
        for i in range(n)
    ]


class TestLoadManifest:
    def test_label_dir_layout(self, tmp_path):
        write_corpus(tmp_path, {Label.HEALTHY: 5}, seed=3, size=32)
        manifest = load_manifest(tmp_path)
        assert len(manifest.samples) == 5
        assert all(s.label == Label.HEALTHY for s in manifest.samples)
        assert manifest.class_counts == {Label.HEALTHY: 5}

    def test_field_scale_counts(self, tmp_path):
        # uneven disease classes at realistic collection sizes
        write_corpus(tmp_path, {Label.BLACK_SCURF: 93, Label.COMMON_SCAB: 126}, seed=1, size=16)
        manifest = load_manifest(tmp_path)
        assert manifest.class_counts == {Label.BLACK_SCURF: 93, Label.COMMON_SCAB: 126}

    def test_empty_directory_is_hard_error(self, tmp_path):
        with pytest.raises(DatasetError, match="no images found"):
            load_manifest(tmp_path)

    def test_unreadable_file_becomes_error_entry(self, tmp_path):
        write_corpus(tmp_path, {Label.HEALTHY: 2}, seed=3, size=32)
        (tmp_path / "healthy" / "broken.png").write_bytes(b"not a png")
        manifest = load_manifest(tmp_path)
        assert len(manifest.samples) == 2
        assert any("broken.png" in e for e in manifest.errors)

    def test_duplicate_ids_rejected(self):
        s = _samples(Label.HEALTHY, 1)[0]
        with pytest.raises(DatasetError, match="duplicate"):
            DatasetManifest(samples=[s, s])

    def test_manifest_json_round_trip(self, tmp_path):
        manifest = DatasetManifest(samples=_samples(Label.HEALTHY, 3))
        path = tmp_path / "manifest.json"
        manifest.save(path)
        back = DatasetManifest.load(path)
        assert [s.id for s in back.samples] == [s.id for s in manifest.samples]
        assert all(s.pixels is None for s in back.samples)


class TestSplit:
    def test_exact_division(self):
        manifest = DatasetManifest(samples=_samples(Label.HEALTHY, 100))
        split_dataset(manifest, ratio=0.8, seed=0)
        counts = {sp: sum(s.split == sp for s in manifest.samples) for sp in Split}
        assert counts[Split.TRAIN] == 80
        assert counts[Split.TEST] == 20

    def test_rounding_93(self):
        # floor on the train side: floor(0.8 * 93) = 74, so 19 test
        manifest = DatasetManifest(samples=_samples(Label.BLACK_SCURF, 93))
        split_dataset(manifest, ratio=0.8, seed=5)
        n_train = sum(s.split == Split.TRAIN for s in manifest.samples)
        assert (n_train, 93 - n_train) == (74, 19)

    def test_stratified_within_one(self):
        samples = (_samples(Label.HEALTHY, 37) + _samples(Label.BLACK_SCURF, 23)
                   + _samples(Label.COMMON_SCAB, 11))
        manifest = DatasetManifest(samples=samples)
        split_dataset(manifest, 0.8, seed=2)
        for label in (Label.HEALTHY, Label.BLACK_SCURF, Label.COMMON_SCAB):
            group = manifest.subset(label=label)
            n_train = sum(s.split == Split.TRAIN for s in group)
            assert abs(n_train - round(0.8 * len(group))) <= 1

    def test_deterministic(self):
        a = DatasetManifest(samples=_samples(Label.HEALTHY, 30))
        b = DatasetManifest(samples=_samples(Label.HEALTHY, 30))
        split_dataset(a, seed=9)
        split_dataset(b, seed=9)
        assert [s.split for s in a.samples] == [s.split for s in b.samples]

    def test_child_inherits_parent_split(self):
        parents = _samples(Label.HEALTHY, 10)
        child = ImageSample(
            id="healthy/child", label=Label.HEALTHY,
            pixels=parents[0].pixels, provenance=Provenance.AUGMENTED,
            source_id=parents[3].id,
        )
        manifest = DatasetManifest(samples=parents + [child])
        split_dataset(manifest, seed=1)
        by_id = manifest.by_id()
        assert by_id["healthy/child"].split == by_id[parents[3].id].split

    def test_tiny_class_errors(self):
        manifest = DatasetManifest(
            samples=_samples(Label.HEALTHY, 5) + _samples(Label.BLACK_SCURF, 1))
        with pytest.raises(DatasetError, match="cannot stratify"):
            split_dataset(manifest)

    def test_requires_unassigned(self):
        manifest = DatasetManifest(samples=_samples(Label.HEALTHY, 4))
        split_dataset(manifest)
        with pytest.raises(DatasetError, match="unassigned"):
            split_dataset(manifest)


class TestPairing:
    def test_cardinality(self):
        healthy = _samples(Label.HEALTHY, 20)
        diseased = _samples(Label.COMMON_SCAB, 93)
        pairs = pair_images(healthy, diseased, k=10, seed=0)
        assert len(pairs) == 930

    def test_minimal_case(self):
        pairs = pair_images(_samples(Label.HEALTHY, 1),
                            _samples(Label.BLACK_SCURF, 1), k=1, seed=0)
        assert len(pairs) == 1

    def test_distinct_partners_per_diseased(self):
        healthy = _samples(Label.HEALTHY, 12)
        diseased = _samples(Label.BLACK_SCURF, 5)
        pairs = pair_images(healthy, diseased, k=10, seed=4)
        assert len(pairs) == 50
        for d in diseased:
            partners = [p.input_id for p in pairs if p.target_id == d.id]
            assert len(partners) == 10
            assert len(set(partners)) == 10

    def test_deterministic(self):
        healthy = _samples(Label.HEALTHY, 15)
        diseased = _samples(Label.COMMON_SCAB, 4)
        a = pair_images(healthy, diseased, k=6, seed=77)
        b = pair_images(healthy, diseased, k=6, seed=77)
        assert a == b

    def test_too_few_healthy(self):
        with pytest.raises(DatasetError, match="at least k"):
            pair_images(_samples(Label.HEALTHY, 3), _samples(Label.BLACK_SCURF, 2), k=10)
