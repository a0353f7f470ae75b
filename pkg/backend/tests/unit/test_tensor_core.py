"""
Unit tests for matrix helpers and the random streams
"""
import numpy as np
import pytest

from backend.services.common.errors import ConfigError, ShapeError
from backend.services.tensor.core import (
    RngStream,
    Streams,
    as_matrix,
    matmul,
    sample_bernoulli,
    sign_of,
    signed_power,
)


class TestMatmul:
    """Test the shape-checked matrix product"""

    def test_identity(self):
        """Identity times a column returns the column"""
        result = matmul(np.eye(2), [[3.0], [4.0]])
        assert np.array_equal(result, [[3.0], [4.0]])

    def test_hand_arithmetic(self):
        assert np.array_equal(matmul([[1, 2], [3, 4]], [[5], [6]]), [[17.0], [39.0]])

    def test_matches_triple_loop(self, rng):
        """Random 7x5 by 5x3 agrees with a naive loop"""
        a = rng.normal((7, 5))
        b = rng.normal((5, 3))
        naive = np.zeros((7, 3))
        for i in range(7):
            for j in range(3):
                for k in range(5):
                    naive[i, j] += a[i, k] * b[k, j]
        assert np.allclose(matmul(a, b), naive, rtol=0, atol=1e-12)

    def test_associativity(self, rng):
        a, b, c = rng.normal((4, 6)), rng.normal((6, 5)), rng.normal((5, 3))
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        assert np.allclose(left, right, rtol=1e-10, atol=1e-12)

    def test_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError) as exc:
            matmul(np.ones((2, 3)), np.ones((2, 3)))
        assert "(2, 3)" in str(exc.value)

    def test_three_dimensional_input_rejected(self):
        with pytest.raises(ShapeError):
            as_matrix(np.ones((2, 2, 2)))


class TestSignedPower:
    """Test |w|^e with the eps floor"""

    def test_square_root(self):
        assert signed_power(np.array([0.25]), 0.5)[0] == pytest.approx(0.5)

    def test_absolute_value(self):
        assert signed_power(np.array([-3.0]), 1.0)[0] == 3.0

    def test_floor_for_negative_exponent(self):
        assert signed_power(np.array([0.0]), -0.5, 1e-8)[0] == pytest.approx(1e4)

    def test_exponent_one_is_exact(self, rng):
        w = rng.normal((5, 5))
        assert np.array_equal(signed_power(w, 1.0), np.abs(w))

    def test_zero_stays_zero_for_positive_exponent(self):
        assert signed_power(np.array([0.0]), 0.5)[0] == 0.0

    def test_non_positive_eps_rejected(self):
        with pytest.raises(ConfigError):
            signed_power(np.array([1.0]), -0.5, 0.0)


class TestSignOf:
    """Test sgn with sgn(0) = 0"""

    def test_values(self):
        assert np.array_equal(sign_of([-2.0, 0.0, 5.0]), [-1.0, 0.0, 1.0])

    def test_all_zero(self):
        assert np.array_equal(sign_of(np.zeros((3, 2))), np.zeros((3, 2)))

    def test_reconstruction(self, rng):
        w = rng.normal((6, 4))
        assert np.array_equal(sign_of(w) * np.abs(w), w)


class TestBernoulli:
    """Test Bernoulli mask sampling"""

    def test_p_one_is_all_ones(self, rng):
        assert np.array_equal(sample_bernoulli(4, 5, 1.0, rng), np.ones((4, 5)))

    def test_mean_near_half(self, rng):
        draws = sample_bernoulli(1000, 1000, 0.5, rng)
        assert abs(draws.mean() - 0.5) < 4 * np.sqrt(0.25 / 1e6)

    def test_values_are_binary(self, rng):
        draws = sample_bernoulli(20, 20, 0.3, rng)
        assert set(np.unique(draws)) <= {0.0, 1.0}

    def test_same_stream_same_draws(self):
        first = sample_bernoulli(8, 8, 0.5, RngStream(3, Streams.MASKS))
        second = sample_bernoulli(8, 8, 0.5, RngStream(3, Streams.MASKS))
        assert np.array_equal(first, second)

    @pytest.mark.parametrize("p", [0.0, -0.1, 1.5])
    def test_invalid_probability(self, rng, p):
        with pytest.raises(ConfigError):
            sample_bernoulli(2, 2, p, rng)


class TestRngStream:
    """Test stream determinism and independence"""

    def test_identical_keys_identical_sequences(self):
        a = RngStream(42, 5).uniform(0.0, 1.0, 100)
        b = RngStream(42, 5).uniform(0.0, 1.0, 100)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(42, 1).uniform(0.0, 1.0, 1000)
        b = RngStream(42, 2).uniform(0.0, 1.0, 1000)
        assert not np.array_equal(a, b)
        # independent uniforms: correlation ~ N(0, 1/1000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.15

    def test_split_is_deterministic(self):
        root = RngStream(9)
        assert np.array_equal(root.split(Streams.DATA).normal(10), RngStream(9).split(Streams.DATA).normal(10))

    def test_split_differs_from_parent_stream(self):
        root = RngStream(9)
        assert root.split(1).key == (0, 1)
        assert not np.array_equal(RngStream(9, 1).normal(10), root.split(1).normal(10))

    def test_negative_seed_rejected(self):
        with pytest.raises(ConfigError):
            RngStream(-1)
