import math

import numpy as np
import pytest
import torch

from cropgan.errors import ShapeError
from cropgan.gan import (
    adversarial_loss_terms,
    cycle_consistency_loss,
    cycle_gan_loss,
    cycle_total_objective,
    least_squares_loss_terms,
    pix2pix_gan_loss,
    pix2pix_l1_loss,
    pix2pix_total_loss,
)


def grid(value, shape=(1, 1)):
    return torch.full(shape, float(value), dtype=torch.float64)


class TestAdversarial:
    def test_maximal_confusion_fixed_point(self):
        loss_d, loss_g = pix2pix_gan_loss(grid(0.5, (4, 4)), grid(0.5, (4, 4)))
        assert float(loss_d) == pytest.approx(2 * math.log(2), abs=1e-9)
        assert float(loss_g) == pytest.approx(math.log(2), abs=1e-9)

    def test_perfect_discriminator_limit(self):
        loss_d, _ = pix2pix_gan_loss(grid(1.0), grid(0.0))
        assert float(loss_d) == pytest.approx(0.0, abs=1e-6)

    def test_hand_case(self):
        loss_d, _ = pix2pix_gan_loss(grid(0.8), grid(0.3))
        assert float(loss_d) == pytest.approx(-(math.log(0.8) + math.log(0.7)), abs=1e-12)
        assert float(loss_d) == pytest.approx(0.5798, abs=1e-4)

    def test_out_of_range_scores_clamped(self):
        loss_d, loss_g = adversarial_loss_terms(grid(1.5), grid(-0.2))
        assert torch.isfinite(loss_d) and torch.isfinite(loss_g)

    def test_cycle_variant_hand_case(self):
        loss_d, _ = cycle_gan_loss(grid(0.9), grid(0.4))
        assert float(loss_d) == pytest.approx(-(math.log(0.9) + math.log(0.6)), abs=1e-12)
        assert float(loss_d) == pytest.approx(0.6162, abs=1e-4)

    def test_cycle_fixed_point(self):
        loss_d, _ = cycle_gan_loss(grid(0.5, (3, 3)), grid(0.5, (3, 3)))
        assert float(loss_d) == pytest.approx(2 * math.log(2), abs=1e-9)

    def test_least_squares_flag(self):
        loss_d, loss_g = cycle_gan_loss(grid(0.9), grid(0.4), least_squares=True)
        assert float(loss_d) == pytest.approx(0.1 ** 2 + 0.4 ** 2, abs=1e-12)
        assert float(loss_g) == pytest.approx(0.6 ** 2, abs=1e-12)
        direct = least_squares_loss_terms(grid(0.9), grid(0.4))
        assert float(direct[0]) == float(loss_d)


class TestL1:
    def test_identical_images(self):
        x = torch.rand(3, 8, 8, dtype=torch.float64) * 2 - 1
        assert float(pix2pix_l1_loss(x, x.clone())) == 0.0

    def test_maximal_distance(self):
        ones = torch.ones(3, 4, 4, dtype=torch.float64)
        assert float(pix2pix_l1_loss(ones, -ones)) == pytest.approx(2.0)

    def test_hand_case(self):
        target = torch.tensor([0.5, -0.5], dtype=torch.float64)
        generated = torch.zeros(2, dtype=torch.float64)
        assert float(pix2pix_l1_loss(target, generated)) == pytest.approx(0.5)

    def test_metric_axioms(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = torch.from_numpy(rng.uniform(-1, 1, (3, 5, 5)))
            b = torch.from_numpy(rng.uniform(-1, 1, (3, 5, 5)))
            assert float(pix2pix_l1_loss(a, b)) >= 0.0
            assert float(pix2pix_l1_loss(a, b)) == pytest.approx(
                float(pix2pix_l1_loss(b, a)), abs=1e-15)
        a = torch.rand(3, 5, 5, dtype=torch.float64)
        assert float(pix2pix_l1_loss(a, a)) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            pix2pix_l1_loss(torch.zeros(2, 2), torch.zeros(3, 3))


class TestTotals:
    def test_pix2pix_weighted_sum(self):
        assert pix2pix_total_loss(1.0, 0.1, 100.0) == pytest.approx(11.0)

    def test_lambda_zero(self):
        assert pix2pix_total_loss(0.73, 9.9, 0.0) == 0.73

    def test_perfect_reconstruction(self):
        assert pix2pix_total_loss(0.42, 0.0, 100.0) == 0.42

    def test_exact_linearity(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, l, lam = rng.uniform(0, 5, 3)
            assert pix2pix_total_loss(a, l, lam) == a + lam * l
            f_ = cycle_total_objective(a, a / 2, l, lam)
            assert f_ == a + a / 2 + lam * l

    def test_cycle_objective_hand_case(self):
        assert cycle_total_objective(1.0, 1.0, 0.3, 10.0) == pytest.approx(5.0)
        assert cycle_total_objective(1.0, 2.0, 123.0, 0.0) == pytest.approx(3.0)
        assert cycle_total_objective(0.0, 0.0, 0.0, 10.0) == 0.0

    def test_negative_lambda_rejected(self):
        with pytest.raises(ShapeError):
            pix2pix_total_loss(1.0, 1.0, -1.0)
        with pytest.raises(ShapeError):
            cycle_total_objective(1.0, 1.0, 1.0, -2.0)


class TestCycleConsistency:
    def test_identity_round_trip(self):
        x = torch.rand(3, 6, 6, dtype=torch.float64)
        y = torch.rand(3, 6, 6, dtype=torch.float64)
        assert float(cycle_consistency_loss(x, x.clone(), y, y.clone())) == 0.0

    def test_constant_offset(self):
        x = torch.rand(3, 4, 4, dtype=torch.float64)
        y = torch.rand(3, 4, 4, dtype=torch.float64)
        got = cycle_consistency_loss(x, x + 0.2, y, y.clone())
        assert float(got) == pytest.approx(0.2, abs=1e-12)

    def test_terms_add(self):
        x = torch.rand(3, 4, 4, dtype=torch.float64)
        y = torch.rand(3, 4, 4, dtype=torch.float64)
        got = cycle_consistency_loss(x, x + 0.1, y, y - 0.1)
        assert float(got) == pytest.approx(0.2, abs=1e-12)

    def test_zero_iff_exact_reconstruction(self):
        x = torch.rand(3, 4, 4, dtype=torch.float64)
        y = torch.rand(3, 4, 4, dtype=torch.float64)
        assert float(cycle_consistency_loss(x, x + 1e-9, y, y.clone())) > 0.0


class TestGradientCheck:
    """Analytic gradients of the total losses vs central finite differences."""

    def _pix2pix_total(self, a, b, x, y, w):
        gx = a * x + b
        score = torch.sigmoid((gx * w).mean()).reshape(1, 1)
        _, adv_g = adversarial_loss_terms(torch.full((1, 1), 0.9, dtype=torch.float64), score)
        return pix2pix_total_loss(adv_g, pix2pix_l1_loss(y, gx), 3.0)

    def _cycle_total(self, a, b, x, y, w):
        gx = a * x + b
        fy = a * y - b
        score_y = torch.sigmoid((gx * w).mean()).reshape(1, 1)
        score_x = torch.sigmoid((fy * w).mean()).reshape(1, 1)
        _, adv_g = cycle_gan_loss(torch.full((1, 1), 0.8, dtype=torch.float64), score_y)
        _, adv_f = cycle_gan_loss(torch.full((1, 1), 0.8, dtype=torch.float64), score_x)
        cyc = cycle_consistency_loss(x, a * gx - b, y, a * fy + b)
        return cycle_total_objective(adv_g, adv_f, cyc, 5.0)

    @pytest.mark.parametrize("loss_name", ["pix2pix", "cycle"])
    def test_two_parameter_generator(self, loss_name):
        torch.manual_seed(0)
        x = torch.rand(3, 8, 8, dtype=torch.float64) * 2 - 1
        y = torch.rand(3, 8, 8, dtype=torch.float64) * 2 - 1
        w = torch.randn(3, 8, 8, dtype=torch.float64) * 0.3
        fn = self._pix2pix_total if loss_name == "pix2pix" else self._cycle_total

        a = torch.tensor(1.2, dtype=torch.float64, requires_grad=True)
        b = torch.tensor(-0.3, dtype=torch.float64, requires_grad=True)
        loss = fn(a, b, x, y, w)
        loss.backward()

        eps = 1e-6
        for param, grad in ((a, a.grad), (b, b.grad)):
            plus = fn(a.detach() + (eps if param is a else 0.0),
                      b.detach() + (eps if param is b else 0.0), x, y, w)
            minus = fn(a.detach() - (eps if param is a else 0.0),
                       b.detach() - (eps if param is b else 0.0), x, y, w)
            numeric = (float(plus) - float(minus)) / (2 * eps)
            rel = abs(float(grad) - numeric) / max(abs(numeric), 1e-8)
            assert rel < 1e-4
