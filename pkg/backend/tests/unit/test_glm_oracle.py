"""
Unit tests for the GLM penalty oracle
"""
import numpy as np
import pytest

from backend.services.common.errors import ConfigError, ShapeError
from backend.services.glm import (
    GlmProblem,
    bridge_penalty_closed_form,
    bridge_penalty_gamma_form,
    bridgeout_feature_noise,
    dropout_ridge_penalty,
    log_partition,
    mc_marginalized_regularizer,
    noise_variance,
    random_problem,
)
from backend.services.regularize import perturb_bridgeout
from backend.services.tensor.core import RngStream, sample_bernoulli


class TestLogPartition:
    """Test A, A' and A''"""

    def test_logistic_at_zero(self):
        a, a1, a2 = log_partition("logistic", 0.0)
        assert (float(a), float(a1), float(a2)) == pytest.approx((np.log(2.0), 0.5, 0.25))

    def test_linear(self):
        a, a1, a2 = log_partition("linear", 3.0)
        assert (float(a), float(a1), float(a2)) == pytest.approx((4.5, 3.0, 1.0))

    def test_second_derivative_matches_finite_difference(self):
        eta = np.linspace(-4.0, 4.0, 33)
        h = 1e-4
        for family in ("linear", "logistic"):
            a_plus, _, _ = log_partition(family, eta + h)
            a_mid, _, a2 = log_partition(family, eta)
            a_minus, _, _ = log_partition(family, eta - h)
            numeric = (a_plus - 2 * a_mid + a_minus) / h ** 2
            assert np.allclose(numeric, a2, atol=1e-6)

    def test_unknown_family(self):
        with pytest.raises(ConfigError):
            log_partition("poisson", 1.0)


class TestNoiseVariance:
    """Test the per-sample variance of the noisy linear predictor"""

    def test_hand_example(self):
        assert noise_variance([1.0, 1.0], [2.0, -1.0], 0.5, 1.0) == pytest.approx(3.0)

    def test_zero_beta(self):
        assert noise_variance([1.0, 2.0], [0.0, 0.0], 0.3, 1.5) == 0.0

    def test_monte_carlo(self):
        rng = RngStream(21)
        x, beta, p, q = np.array([0.7, -1.3, 2.0]), np.array([0.4, -1.1, 0.25]), 0.6, 1.3
        n = 200_000
        masks = sample_bernoulli(n, 3, p, rng) / p
        noisy = bridgeout_feature_noise(x.reshape(1, -1), beta, masks, q) @ beta
        var = noisy.var(ddof=1)
        # standard error of a sample variance: var * sqrt(2 / (n - 1)) for near-normal data,
        # widened for the Bernoulli kurtosis
        se = np.sqrt(np.mean((noisy - noisy.mean()) ** 4) / n)
        assert abs(var - noise_variance(x, beta, p, q)) < 4 * se

    def test_retention_must_be_below_one(self):
        with pytest.raises(ConfigError):
            noise_variance([1.0], [1.0], 1.0, 1.0)


class TestClosedForm:
    """Test the quadratic approximation and its Gamma form"""

    def test_hand_example(self):
        prob = GlmProblem(np.array([[1.0, 0.0]]), np.array([0.0]), np.array([3.0, 5.0]), "linear")
        r_hat, gamma = bridge_penalty_closed_form(prob, 0.5, 1.0)
        assert r_hat == pytest.approx(1.5)
        assert np.allclose(gamma, [1.0, 0.0])

    @pytest.mark.parametrize("family", ["linear", "logistic"])
    def test_gamma_form_agrees(self, family):
        prob = random_problem(family, 30, 6, RngStream(4))
        r_hat, _ = bridge_penalty_closed_form(prob, 0.4, 1.3)
        assert bridge_penalty_gamma_form(prob, 0.4, 1.3) == pytest.approx(r_hat, rel=1e-12)

    @pytest.mark.parametrize("family", ["linear", "logistic"])
    def test_q_two_is_dropout_ridge(self, family):
        for seed in range(50):
            prob = random_problem(family, 12, 4, RngStream(seed))
            r_hat, _ = bridge_penalty_closed_form(prob, 0.35, 2.0)
            ridge = dropout_ridge_penalty(prob, 0.35)
            assert abs(r_hat - ridge) <= 1e-12 * max(abs(ridge), 1e-300)

    def test_non_increasing_in_p(self):
        prob = random_problem("logistic", 20, 5, RngStream(8))
        values = [bridge_penalty_closed_form(prob, p, 1.0)[0] for p in np.linspace(0.1, 0.9, 9)]
        assert all(b <= a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("s", [0.5, 2.0])
    def test_linear_scaling(self, s):
        prob = random_problem("linear", 15, 4, RngStream(12))
        scaled = GlmProblem(prob.X, prob.y, s * prob.beta, "linear")
        base, _ = bridge_penalty_closed_form(prob, 0.5, 1.3)
        assert bridge_penalty_closed_form(scaled, 0.5, 1.3)[0] == pytest.approx(s ** 1.3 * base, rel=1e-12)

    def test_weight_noise_equals_feature_noise(self):
        rng = RngStream(30)
        X, beta, p, q = rng.normal((6, 4)), rng.normal(4), 0.5, 1.2
        for i in range(X.shape[0]):
            mask = sample_bernoulli(1, 4, p, rng)
            noisy_beta = perturb_bridgeout(beta.reshape(1, -1), mask, p, q)[0]
            noisy_x = bridgeout_feature_noise(X[i:i + 1], beta, mask / p, q)[0]
            assert X[i] @ noisy_beta == pytest.approx(noisy_x @ beta, abs=1e-12)


class TestMonteCarlo:
    """Test the Monte-Carlo estimate against the closed form"""

    def test_vanishing_noise(self):
        prob = random_problem("logistic", 10, 3, RngStream(1), beta_scale=0.5)
        report = mc_marginalized_regularizer(prob, 0.999, 1.0, 200, RngStream(2))
        assert abs(report.mc_estimate) <= 3 * report.mc_stderr or report.mc_stderr == 0.0

    def test_linear_family_exact(self):
        prob = random_problem("linear", 20, 4, RngStream(5), beta_scale=2.0)
        report = mc_marginalized_regularizer(prob, 0.5, 1.0, 20000, RngStream(6))
        assert abs(report.mc_estimate - report.closed_form) < 4 * report.mc_stderr

    def test_logistic_small_coefficients(self):
        prob = random_problem("logistic", 20, 4, RngStream(7), beta_scale=0.05)
        report = mc_marginalized_regularizer(prob, 0.5, 1.0, 20000, RngStream(8))
        tolerance = max(0.05 * report.closed_form, 4 * report.mc_stderr)
        assert abs(report.mc_estimate - report.closed_form) <= tolerance

    def test_record_line(self):
        prob = random_problem("linear", 5, 2, RngStream(3))
        record = mc_marginalized_regularizer(prob, 0.5, 1.0, 100, RngStream(4)).to_record()
        assert record.startswith("family=linear p=0.5 q=1 ")
        assert "\n" not in record

    def test_too_few_samples(self):
        prob = random_problem("linear", 5, 2, RngStream(3))
        with pytest.raises(ConfigError):
            mc_marginalized_regularizer(prob, 0.5, 1.0, 10, RngStream(4))


class TestProblemValidation:
    """Test GlmProblem invariants"""

    def test_logistic_labels(self):
        with pytest.raises(ConfigError):
            GlmProblem(np.ones((2, 2)), np.array([0.0, 2.0]), np.ones(2), "logistic")

    def test_coefficient_count(self):
        with pytest.raises(ShapeError):
            GlmProblem(np.ones((2, 2)), np.zeros(2), np.ones(3), "linear")
