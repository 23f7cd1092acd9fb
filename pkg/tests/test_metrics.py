import numpy as np
import pytest

from inrestore import Rng, psnr, ssim


def _img(seed, h=16, w=16):
    return Rng(seed).uniform(h * w * 3, 0, 1).reshape(h, w, 3)


class TestPsnr:
    def test_identical_is_inf(self):
        a = _img(1)
        assert psnr(a, a) == float("inf")

    def test_constant_half_difference(self):
        a = np.zeros((8, 8, 3))
        b = np.full((8, 8, 3), 0.5)
        assert psnr(a, b) == pytest.approx(6.020599913279624, abs=1e-6)

    def test_halving_mse_adds_3dB(self):
        a = np.zeros((8, 8, 3))
        b = np.full((8, 8, 3), 0.5)
        c = np.full((8, 8, 3), 0.5 / np.sqrt(2.0))
        assert psnr(a, c) - psnr(a, b) == pytest.approx(3.010299956639812, abs=1e-9)

    def test_symmetry(self):
        a, b = _img(2), _img(3)
        assert psnr(a, b) == psnr(b, a)

    def test_strictly_decreasing_in_mse(self):
        a = np.zeros((8, 8, 3))
        values = [psnr(a, np.full((8, 8, 3), d)) for d in (0.1, 0.2, 0.4, 0.8)]
        assert all(x > y for x, y in zip(values, values[1:]))

    def test_clamps_before_scoring(self):
        a = np.zeros((8, 8, 3))
        assert psnr(a, np.full((8, 8, 3), 1.7)) == psnr(a, np.ones((8, 8, 3)))

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))

    def test_bad_peak(self):
        with pytest.raises(ValueError):
            psnr(_img(1), _img(2), peak=0.0)


class TestSsim:
    def test_identical_is_one(self):
        a = _img(4)
        assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_constant_pair_luminance_only(self):
        a = np.full((16, 16, 3), 0.2)
        b = np.full((16, 16, 3), 0.4)
        # variance terms vanish; (2*0.08 + 1e-4) / (0.2 + 1e-4)
        assert ssim(a, b) == pytest.approx(0.8001, abs=1e-3)

    def test_anticorrelated_is_negative(self):
        ramp = np.tile(np.linspace(0, 1, 32)[None, :, None], (32, 1, 3))
        assert ssim(ramp, 1.0 - ramp) < 0.0

    def test_symmetry(self):
        a, b = _img(5), _img(6)
        assert ssim(a, b) == ssim(b, a)

    def test_channel_swap_invariance(self):
        a, b = _img(7), _img(8)
        perm = [2, 0, 1]
        assert ssim(a, b) == pytest.approx(ssim(a[:, :, perm], b[:, :, perm]), abs=1e-15)

    def test_rejects_images_smaller_than_window(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((10, 16, 3)), np.zeros((10, 16, 3)))

    def test_in_unit_interval_for_positive_pairs(self):
        v = ssim(_img(9), _img(10))
        assert -1.0 <= v <= 1.0
