import math

import numpy as np
import pytest

from cropgan.errors import NumericalError, ShapeError
from cropgan.genmetrics import (
    FeatureStats,
    RandomProjectionExtractor,
    TinyCnnExtractor,
    fid,
    fit_gaussian,
    inception_score,
    matrix_sqrt_psd,
    score_generation,
    trace_sqrt_product,
)


def random_psd(rng, d, rank=None):
    f = rng.normal(size=(d, rank or d))
    return f @ f.T


class TestFitGaussian:
    def test_hand_case(self):
        stats = fit_gaussian(np.array([[0.0, 0.0], [2.0, 2.0]]))
        assert np.allclose(stats.mu, [1.0, 1.0])
        assert np.allclose(stats.sigma, [[2.0, 2.0], [2.0, 2.0]])
        assert stats.n == 2

    def test_identical_rows_zero_covariance(self):
        stats = fit_gaussian(np.tile([3.0, -1.0, 2.0], (7, 1)))
        assert np.allclose(stats.sigma, 0.0)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 4))
        a = fit_gaussian(x)
        b = fit_gaussian(x[rng.permutation(20)])
        assert np.allclose(a.mu, b.mu)
        assert np.allclose(a.sigma, b.sigma)

    def test_single_row_rejected(self):
        with pytest.raises(NumericalError):
            fit_gaussian(np.ones((1, 3)))


class TestMatrixSqrt:
    def test_identity(self):
        assert np.allclose(matrix_sqrt_psd(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        assert np.allclose(matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_zero_matrix(self):
        assert np.allclose(matrix_sqrt_psd(np.zeros((3, 3))), 0.0)

    def test_random_psd_residual(self):
        rng = np.random.default_rng(1)
        for d in (2, 3, 8, 16, 64):
            a = random_psd(rng, d)
            s = matrix_sqrt_psd(a)
            assert np.linalg.norm(s @ s - a) < 1e-6 * np.linalg.norm(a)

    def test_small_psd_tight_residual(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = random_psd(rng, 3)
            s = matrix_sqrt_psd(a)
            assert np.linalg.norm(s @ s - a) < 1e-8 * max(np.linalg.norm(a), 1.0)

    def test_nonsymmetric_product_of_psd(self):
        rng = np.random.default_rng(3)
        for d in (2, 5, 10):
            a = random_psd(rng, d) @ random_psd(rng, d)
            s = matrix_sqrt_psd(a)
            assert np.linalg.norm(s @ s - a) < 1e-6 * np.linalg.norm(a)

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NumericalError, match="negative eigenvalue"):
            matrix_sqrt_psd(np.diag([1.0, -0.5]))

    def test_tiny_negative_clipped(self):
        a = np.diag([1.0, -5e-9])
        s = matrix_sqrt_psd(a)
        assert s[1, 1] == 0.0


class TestFid:
    def _stats_1d(self, mu, var):
        return FeatureStats(mu=np.array([mu]), sigma=np.array([[var]]), n=10)

    def test_self_distance_zero(self):
        rng = np.random.default_rng(4)
        stats = fit_gaussian(rng.normal(size=(30, 6)))
        assert abs(fid(stats, stats)) <= 1e-9

    def test_1d_mean_shift(self):
        assert fid(self._stats_1d(0.0, 1.0), self._stats_1d(1.0, 1.0)) == pytest.approx(1.0, abs=1e-9)

    def test_1d_variance_gap(self):
        assert fid(self._stats_1d(0.0, 1.0), self._stats_1d(0.0, 4.0)) == pytest.approx(1.0, abs=1e-9)

    def test_1d_closed_form_random(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            mu_r, mu_g = rng.normal(size=2)
            sd_r, sd_g = rng.uniform(0.1, 3.0, size=2)
            got = fid(self._stats_1d(mu_r, sd_r ** 2), self._stats_1d(mu_g, sd_g ** 2))
            expected = (mu_r - mu_g) ** 2 + (sd_r - sd_g) ** 2
            assert got == pytest.approx(expected, abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        a = fit_gaussian(rng.normal(size=(40, 5)))
        b = fit_gaussian(rng.normal(loc=0.3, size=(35, 5)))
        assert fid(a, b) == pytest.approx(fid(b, a), rel=1e-9, abs=1e-9)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(50, 8))
        y = rng.normal(loc=0.5, scale=1.3, size=(60, 8))
        base = fid(fit_gaussian(x), fit_gaussian(y))
        for _ in range(5):
            q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
            rotated = fid(fit_gaussian(x @ q), fit_gaussian(y @ q))
            assert rotated == pytest.approx(base, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            fid(FeatureStats(np.zeros(2), np.eye(2), 5),
                FeatureStats(np.zeros(3), np.eye(3), 5))

    def test_trace_sqrt_product_oracle(self):
        rng = np.random.default_rng(8)
        for d in (2, 4, 9):
            sr = random_psd(rng, d)
            sg = random_psd(rng, d)
            # oracle: eigenvalues of the (similar-to-PSD) product
            eigs = np.linalg.eigvals(sr @ sg)
            expected = np.sqrt(np.clip(eigs.real, 0, None)).sum()
            assert trace_sqrt_product(sr, sg) == pytest.approx(expected, rel=1e-8)


class TestInceptionScore:
    def test_uniform_rows_give_one(self):
        probs = np.full((12, 4), 0.25)
        mean, std = inception_score(probs)
        assert mean == pytest.approx(1.0, abs=1e-9)
        assert std == 0.0

    @pytest.mark.parametrize("c", [2, 3, 5])
    def test_balanced_one_hot_gives_c(self, c):
        probs = np.tile(np.eye(c), (4, 1))
        mean, _ = inception_score(probs)
        assert mean == pytest.approx(c, abs=1e-6)

    def test_brute_force_small_fixture(self):
        rng = np.random.default_rng(9)
        raw = rng.random((8, 4))
        probs = raw / raw.sum(axis=1, keepdims=True)
        marginal = probs.mean(axis=0)
        kls = []
        for row in probs:
            kls.append(sum(p * math.log(p / m) for p, m in zip(row, marginal) if p > 0))
        expected = math.exp(sum(kls) / len(kls))
        mean, _ = inception_score(probs)
        assert mean == pytest.approx(expected, abs=1e-12)

    def test_bounds_on_random_matrices(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            c = int(rng.integers(2, 7))
            n = int(rng.integers(2, 12))
            raw = rng.random((n, c)) ** 3
            probs = raw / raw.sum(axis=1, keepdims=True)
            mean, _ = inception_score(probs)
            assert 1.0 - 1e-9 <= mean <= c + 1e-9

    def test_splits(self):
        # 3 chunks of rows, each chunk a balanced one-hot block
        probs = np.tile(np.eye(3), (3, 1))
        mean, std = inception_score(probs, splits=3)
        assert mean == pytest.approx(3.0, abs=1e-6)
        assert std == pytest.approx(0.0, abs=1e-9)

    def test_more_splits_than_rows_rejected(self):
        with pytest.raises(NumericalError):
            inception_score(np.full((2, 3), 1 / 3), splits=5)

    def test_invalid_rows_rejected(self):
        with pytest.raises(NumericalError):
            inception_score(np.array([[0.7, 0.7], [0.5, 0.5]]))


class TestScoreGeneration:
    def test_same_set_fid_zero(self):
        rng = np.random.default_rng(11)
        images = rng.integers(0, 256, (6, 32, 32, 3), dtype=np.uint8)
        report = score_generation(images, images, RandomProjectionExtractor(seed=1))
        assert report["fid"] == pytest.approx(0.0, abs=1e-9)
        assert report["n_real"] == report["n_gen"] == 6
        assert report["extractor_name"].startswith("random_projection")

    def test_constant_sets_reduce_to_squared_distance(self):
        extractor = RandomProjectionExtractor(seed=2)
        a = np.full((3, 32, 32, 3), 60, np.uint8)
        b = np.full((3, 32, 32, 3), 190, np.uint8)
        fa = extractor.embed(a[:1])[0]
        fb = extractor.embed(b[:1])[0]
        report = score_generation(a, b, extractor)
        assert report["fid"] == pytest.approx(float(np.sum((fa - fb) ** 2)), rel=1e-9)

    def test_is_matches_extractor_probs(self):
        rng = np.random.default_rng(12)
        images = rng.integers(0, 256, (8, 32, 32, 3), dtype=np.uint8)
        extractor = RandomProjectionExtractor(seed=3, n_classes=4)
        report = score_generation(images, images, extractor)
        expected, _ = inception_score(extractor.classify(images))
        assert report["is_mean"] == pytest.approx(expected, abs=1e-12)

    def test_too_few_images_rejected(self):
        images = np.zeros((1, 16, 16, 3), np.uint8)
        with pytest.raises(NumericalError):
            score_generation(images, images, RandomProjectionExtractor())

    def test_tiny_cnn_batching_invariance(self):
        rng = np.random.default_rng(13)
        images = rng.integers(0, 256, (9, 32, 32, 3), dtype=np.uint8)
        extractor = TinyCnnExtractor(seed=5)
        whole = extractor.embed(images, batch_size=9)
        chunked = extractor.embed(images, batch_size=2)
        assert np.abs(whole - chunked).max() < 1e-6
