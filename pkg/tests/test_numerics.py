import numpy as np
import pytest

from inrestore import Rng, matmul


class TestMatmul:
    def test_identity_case(self):
        rng = Rng(1)
        a = rng.uniform(2 * 7, -1, 1).reshape(2, 7)
        assert np.array_equal(matmul(np.eye(2), a), a)

    def test_hand_arithmetic(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        b = np.array([[5.0], [6.0]])
        assert np.array_equal(matmul(a, b), [[17.0], [39.0]])

    def test_dimension_mismatch_names_both_shapes(self):
        with pytest.raises(ValueError, match=r"2x3.*2x2"):
            matmul(np.zeros((2, 3)), np.zeros((2, 2)))

    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            matmul(np.zeros(3), np.zeros((3, 2)))

    def test_associativity(self):
        rng = Rng(7)
        for _ in range(20):
            a = rng.uniform(4 * 5, -1, 1).reshape(4, 5)
            b = rng.uniform(5 * 3, -1, 1).reshape(5, 3)
            c = rng.uniform(3 * 6, -1, 1).reshape(3, 6)
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            assert np.abs(left - right).max() < 1e-9

    def test_distributivity(self):
        rng = Rng(8)
        for _ in range(20):
            a = rng.uniform(4 * 5, -1, 1).reshape(4, 5)
            b = rng.uniform(5 * 3, -1, 1).reshape(5, 3)
            c = rng.uniform(5 * 3, -1, 1).reshape(5, 3)
            assert np.abs(matmul(a, b + c) - (matmul(a, b) + matmul(a, c))).max() < 1e-9

    def test_output_finite(self):
        rng = Rng(9)
        out = matmul(
            rng.uniform(30, -10, 10).reshape(5, 6),
            rng.uniform(24, -10, 10).reshape(6, 4),
        )
        assert np.all(np.isfinite(out))


class TestRng:
    def test_same_seed_same_uniform_sequence(self):
        assert np.array_equal(Rng(42).uniform(100, 0, 1), Rng(42).uniform(100, 0, 1))

    def test_byte_identical_mixed_sequences(self):
        def draw(r):
            return np.concatenate([r.uniform(10, -2, 3), r.normal(10, 0.5, 2.0)])

        assert draw(Rng(123)).tobytes() == draw(Rng(123)).tobytes()

    def test_uniform_bounds(self):
        v = Rng(5).uniform(10000, -1.5, 2.5)
        assert v.min() >= -1.5 and v.max() < 2.5

    def test_uniform_mean(self):
        v = Rng(17).uniform(100_000, 0.0, 1.0)
        assert abs(v.mean() - 0.5) < 0.01

    def test_uniform_rejects_bad_range(self):
        with pytest.raises(ValueError):
            Rng(1).uniform(5, 1.0, 1.0)
        with pytest.raises(ValueError):
            Rng(1).uniform(5, 2.0, -1.0)

    def test_normal_sigma_zero(self):
        assert np.array_equal(Rng(3).normal(50, 0.25, 0.0), np.full(50, 0.25))

    def test_normal_same_seed(self):
        assert np.array_equal(Rng(9).normal(64, 0, 1), Rng(9).normal(64, 0, 1))

    def test_normal_std(self):
        v = Rng(21).normal(100_000, 0.0, 1.0)
        assert 0.99 <= v.std() <= 1.01

    def test_normal_rejects_negative_sigma(self):
        with pytest.raises(ValueError):
            Rng(1).normal(5, 0.0, -0.1)
