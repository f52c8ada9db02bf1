import numpy as np
import pytest

from cropgan.errors import ShapeError
from cropgan.seg import bbox_iou, dice, mask_iou


def test_identical_masks():
    rng = np.random.default_rng(0)
    m = rng.random((16, 16)) < 0.4
    assert mask_iou(m, m) == 1.0
    assert dice(m, m) == 1.0


def test_disjoint_masks():
    a = np.zeros((8, 8), bool)
    b = np.zeros((8, 8), bool)
    a[:2, :2] = True
    b[6:, 6:] = True
    assert mask_iou(a, b) == 0.0
    assert dice(a, b) == 0.0


def test_two_pixel_overlap_case():
    a = np.zeros((4, 4), bool)
    b = np.zeros((4, 4), bool)
    a[0, 0] = a[0, 1] = True
    b[0, 1] = b[0, 2] = True
    assert mask_iou(a, b) == pytest.approx(1 / 3)
    assert dice(a, b) == pytest.approx(0.5)


def test_both_empty_convention():
    e = np.zeros((5, 5), bool)
    assert mask_iou(e, e) == 1.0
    assert dice(e, e) == 1.0
    f = e.copy()
    f[0, 0] = True
    assert mask_iou(e, f) == 0.0
    assert dice(e, f) == 0.0


def test_shape_mismatch_rejected():
    with pytest.raises(ShapeError):
        mask_iou(np.zeros((3, 3), bool), np.zeros((4, 4), bool))
    with pytest.raises(ShapeError):
        dice(np.zeros((3, 3), bool), np.zeros((4, 4), bool))


def test_exhaustive_3x3_against_bit_counting():
    """Every pair of 3x3 masks, checked against integer popcount arithmetic."""
    masks = [np.array([(m >> k) & 1 for k in range(9)], bool).reshape(3, 3)
             for m in range(512)]
    pops = [bin(m).count("1") for m in range(512)]
    for a_bits in range(512):
        a = masks[a_bits]
        for b_bits in range(512):
            inter = bin(a_bits & b_bits).count("1")
            union = bin(a_bits | b_bits).count("1")
            expected_iou = 1.0 if union == 0 else inter / union
            total = pops[a_bits] + pops[b_bits]
            expected_dice = 1.0 if total == 0 else 2 * inter / total
            assert mask_iou(a, masks[b_bits]) == expected_iou
            assert dice(a, masks[b_bits]) == expected_dice


def test_dice_iou_algebraic_identity():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        a = rng.random((32, 32)) < rng.uniform(0.05, 0.6)
        b = rng.random((32, 32)) < rng.uniform(0.05, 0.6)
        i = mask_iou(a, b)
        d = dice(a, b)
        assert abs(d - 2 * i / (1 + i)) < 1e-12
        assert 0.0 <= i <= d <= 1.0


class TestBboxIou:
    def test_identical(self):
        assert bbox_iou((1, 2, 3, 4), (1, 2, 3, 4)) == 1.0

    def test_hand_case(self):
        assert bbox_iou((0, 0, 2, 2), (1, 1, 2, 2)) == pytest.approx(1 / 7)

    def test_disjoint(self):
        assert bbox_iou((0, 0, 2, 2), (5, 5, 2, 2)) == 0.0

    def test_zero_area(self):
        assert bbox_iou((0, 0, 0, 5), (0, 0, 2, 2)) == 0.0

    def test_negative_extent_rejected(self):
        with pytest.raises(ShapeError):
            bbox_iou((0, 0, -1, 2), (0, 0, 2, 2))
