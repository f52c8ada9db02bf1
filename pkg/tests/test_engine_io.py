import json

import numpy as np
import pytest

from cropgan.data import Label
from cropgan.errors import DatasetError
from cropgan.seg import (
    InstanceRecord,
    SegEngineConfig,
    emit_engine_config,
    export_predictions,
    import_predictions,
    iteration_count,
    rle_decode,
    rle_encode,
)


def block(r, c, h, w, shape=(16, 16)):
    m = np.zeros(shape, bool)
    m[r:r + h, c:c + w] = True
    return m


class TestRle:
    def test_round_trip_uncompressed(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            mask = rng.random((11, 7)) < 0.35
            assert np.array_equal(rle_decode(rle_encode(mask)), mask)

    def test_round_trip_compressed(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            mask = rng.random((13, 9)) < 0.5
            assert np.array_equal(rle_decode(rle_encode(mask, compress=True)), mask)

    def test_column_major_hand_fixture(self):
        # 2x3 mask, column-major runs: [1 zero, 2 ones, 1 zero, 1 one, 1 zero]
        mask = np.array([[False, False, False],
                         [True, True, False]])
        mask[0, 1] = True
        # columns: (F,T),(T,T),(F,F) -> flat F T T T F F -> counts [1,3,2]
        enc = rle_encode(mask)
        assert enc == {"size": [2, 3], "counts": [1, 3, 2]}
        assert np.array_equal(rle_decode(enc), mask)

    def test_bad_total_rejected(self):
        with pytest.raises(DatasetError, match="RLE runs"):
            rle_decode({"size": [4, 4], "counts": [3, 2]})


class TestImportPredictions:
    def _names(self):
        return {1: "black_scurf/im0", 2: "black_scurf/im1"}

    def _cats(self):
        return {1: "black_scurf", 2: "common_scab"}

    def test_empty_results(self):
        records, errors = import_predictions([], self._names(), self._cats())
        assert records == [] and errors == []

    def test_single_detection_popcount(self):
        mask = block(2, 3, 4, 5)
        det = {"image_id": 1, "category_id": 1,
               "segmentation": rle_encode(mask), "score": 0.75}
        records, errors = import_predictions([det], self._names(), self._cats())
        assert errors == []
        assert len(records) == 1
        assert int(records[0].mask.sum()) == 20
        assert records[0].class_label == Label.BLACK_SCURF
        assert records[0].score == 0.75

    def test_polygon_and_rle_give_identical_masks(self):
        # rectangle [3,2]..[8,6): polygon centres inside match the block mask
        mask = block(2, 3, 4, 5)
        poly_det = {"image_id": 1, "category_id": 1,
                    "segmentation": [[3.0, 2.0, 8.0, 2.0, 8.0, 6.0, 3.0, 6.0]],
                    "score": 0.5}
        rle_det = {"image_id": 1, "category_id": 1,
                   "segmentation": rle_encode(mask, compress=True), "score": 0.5}
        records, errors = import_predictions(
            [poly_det, rle_det], self._names(), self._cats(),
            image_sizes={1: (16, 16)})
        assert errors == []
        assert np.array_equal(records[0].mask, records[1].mask)

    def test_undecodable_detection_isolated(self):
        good = {"image_id": 1, "category_id": 1,
                "segmentation": rle_encode(block(0, 0, 3, 3)), "score": 0.9}
        bad = {"image_id": 1, "category_id": 1, "segmentation": 42, "score": 0.9}
        records, errors = import_predictions([bad, good], self._names(), self._cats())
        assert len(records) == 1
        assert len(errors) == 1 and "detection 0" in errors[0]

    def test_bbox_mismatch_detected(self):
        det = {"image_id": 1, "category_id": 1,
               "segmentation": rle_encode(block(2, 3, 4, 5)),
               "bbox": [9.0, 9.0, 4.0, 5.0], "score": 0.9}
        records, errors = import_predictions([det], self._names(), self._cats())
        assert records == []
        assert "disagrees" in errors[0]

    def test_export_import_identity(self):
        rng = np.random.default_rng(5)
        records = []
        for i in range(6):
            mask = np.zeros((16, 16), bool)
            while not mask.any():
                mask = rng.random((16, 16)) < 0.3
            records.append(InstanceRecord(
                image_id="black_scurf/im0", class_label=Label.COMMON_SCAB,
                mask=mask, score=float(np.round(rng.uniform(0.1, 0.9), 6))))
        doc = export_predictions(records, {"black_scurf/im0": 1}, {"common_scab": 2})
        back, errors = import_predictions(doc, {1: "black_scurf/im0"}, {2: "common_scab"})
        assert errors == []
        for orig, rec in zip(records, back):
            assert rec.class_label == orig.class_label
            assert rec.score == orig.score
            assert np.array_equal(rec.mask, orig.mask)

    def test_json_file_round_trip(self, tmp_path):
        mask = block(1, 1, 5, 5)
        doc = export_predictions(
            [InstanceRecord(image_id="black_scurf/im0", class_label=Label.BLACK_SCURF,
                            mask=mask, score=0.5)],
            {"black_scurf/im0": 1}, {"black_scurf": 1})
        path = tmp_path / "results.json"
        path.write_text(json.dumps(doc))
        records, errors = import_predictions(path, self._names(), self._cats())
        assert errors == [] and len(records) == 1


class TestEngineConfig:
    def test_iteration_arithmetic(self):
        assert iteration_count(25, 1000, 8) == 3125
        assert iteration_count(25, 1001, 8) == 25 * 126

    def test_three_backbones_three_files(self, tmp_path):
        train_json = tmp_path / "coco_train.json"
        train_json.write_text("{}")
        written = []
        for backbone in ("resnet50", "resnet101", "resnext101"):
            cfg = SegEngineConfig(backbone=backbone, train_json=str(train_json))
            out = emit_engine_config(cfg, n_train=1000, out_dir=tmp_path / "configs")
            written.append(out["config"])
            assert out["max_iter"] == 3125
        assert len(set(written)) == 3

    def test_invalid_backbone_lists_valid_set(self):
        with pytest.raises(DatasetError, match="resnext101"):
            SegEngineConfig(backbone="vgg16")

    def test_missing_export_is_error(self, tmp_path):
        cfg = SegEngineConfig(train_json=str(tmp_path / "absent.json"))
        with pytest.raises(DatasetError, match="export"):
            emit_engine_config(cfg, n_train=100, out_dir=tmp_path)
