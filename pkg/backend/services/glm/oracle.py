"""
GLM oracle for the Bridgeout / L_q penalty equivalence

For a GLM with log-partition A, Bridgeout noise on the coefficients is the same as
feature noise x~_j = x_j [1 + |b_j|^((q-2)/2) sgn(b_j) (m_j - 1)] with E[m] = 1. The
marginalized excess loss R(b) = sum_i E[A(x~_i . b)] - A(x_i . b) has the quadratic
approximation R^(b) = (1-p)/(2p) sum_j (X^T D X)_jj |b_j|^q with D = diag(A''(x_i . b)).
"""
import uuid
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import expit

from ..common.errors import ConfigError, ShapeError
from ..common.logger import get_logger
from ..common.models import PenaltyReport
from ..tensor.core import DEFAULT_EPS, RngStream, as_matrix, sample_bernoulli, sign_of, signed_power

logger = get_logger("glm_oracle")

Family = Literal["linear", "logistic"]

# masks drawn per chunk in the Monte-Carlo estimate
_MC_CHUNK = 256


@dataclass(frozen=True)
class GlmProblem:
    """Design matrix X (n x d), responses y, coefficients beta and the family"""
    X: np.ndarray
    y: np.ndarray
    beta: np.ndarray
    family: Family

    def __post_init__(self):
        X = as_matrix(self.X, "design matrix")
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        beta = np.asarray(self.beta, dtype=np.float64).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ShapeError(f"{y.shape[0]} responses for {X.shape[0]} rows")
        if beta.shape[0] != X.shape[1]:
            raise ShapeError(f"{beta.shape[0]} coefficients for {X.shape[1]} columns")
        if self.family not in ("linear", "logistic"):
            raise ConfigError(f"Unknown GLM family: {self.family}")
        if self.family == "logistic" and not np.all(np.isin(y, (0.0, 1.0))):
            raise ConfigError("logistic responses must be 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "beta", beta)

    @property
    def eta(self) -> np.ndarray:
        return self.X @ self.beta


def _check_open_retention(p: float):
    if not 0.0 < p < 1.0:
        raise ConfigError(f"retention probability must lie in (0, 1), got {p}")


def log_partition(family: Family, eta):
    """Return (A, A', A'') at eta (scalars or arrays)"""
    eta = np.asarray(eta, dtype=np.float64)
    if family == "linear":
        return 0.5 * eta ** 2, eta.copy(), np.ones_like(eta)
    if family == "logistic":
        sigma = expit(eta)
        # softplus without overflow
        return np.logaddexp(0.0, eta), sigma, sigma * (1.0 - sigma)
    raise ConfigError(f"Unknown GLM family: {family}")


def noise_variance(x: np.ndarray, beta: np.ndarray, p: float, q: float) -> float:
    """Var[x~ . beta] = sum_j (1-p)/p |beta_j|^q x_j^2"""
    _check_open_retention(p)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    if x.shape != beta.shape:
        raise ShapeError.mismatch("feature row", x.shape, beta.shape)
    return float((1.0 - p) / p * np.sum(signed_power(beta, q) * x ** 2))


def bridgeout_feature_noise(X: np.ndarray, beta: np.ndarray, scaled_mask: np.ndarray, q: float,
                            eps: float = DEFAULT_EPS) -> np.ndarray:
    """Feature-noise form of Bridgeout: x_j [1 + |b_j|^((q-2)/2) sgn(b_j) (m_j - 1)]"""
    X = as_matrix(X, "design matrix")
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    factor = signed_power(beta, (q - 2.0) / 2.0, eps) * sign_of(beta)
    return X * (1.0 + factor * (np.asarray(scaled_mask, dtype=np.float64) - 1.0))


def _curvature_diag(prob: GlmProblem) -> np.ndarray:
    """diag(X^T D X) with D = diag(A''(x_i . beta)) evaluated at the current beta"""
    _, _, a2 = log_partition(prob.family, prob.eta)
    return np.einsum("i,ij->j", a2, prob.X ** 2)


def bridge_penalty_per_sample(prob: GlmProblem, p: float, q: float) -> float:
    """sum_i A''(x_i . beta)/2 * Var[x~_i . beta]"""
    _check_open_retention(p)
    _, _, a2 = log_partition(prob.family, prob.eta)
    variances = np.array([noise_variance(x, prob.beta, p, q) for x in prob.X])
    return float(np.sum(0.5 * a2 * variances))


def bridge_penalty_closed_form(prob: GlmProblem, p: float, q: float) -> tuple[float, np.ndarray]:
    """
    Quadratic approximation of the marginalized regularizer and the diagonal of Gamma.

    Returns (R^, gamma_diag) with gamma_diag_j = (X^T D X)_jj^(1/q), so that
    R^ = (1-p)/(2p) * sum_j (gamma_diag_j |beta_j|)^q.
    """
    _check_open_retention(p)
    if q <= 0:
        raise ConfigError(f"norm power q must be positive, got {q}")
    r_hat = bridge_penalty_per_sample(prob, p, q)
    gamma_diag = np.power(_curvature_diag(prob), 1.0 / q)
    return r_hat, gamma_diag


def bridge_penalty_gamma_form(prob: GlmProblem, p: float, q: float) -> float:
    """(1-p)/(2p) ||Gamma beta||_q^q with the diagonal Gamma"""
    _, gamma_diag = bridge_penalty_closed_form(prob, p, q)
    return float((1.0 - p) / (2.0 * p) * np.sum(np.power(gamma_diag * np.abs(prob.beta), q)))


def dropout_ridge_penalty(prob: GlmProblem, p: float) -> float:
    """Dropout's quadratic penalty (1-p)/(2p) sum_j beta_j^2 (X^T D X)_jj"""
    _check_open_retention(p)
    return float((1.0 - p) / (2.0 * p) * np.sum(prob.beta ** 2 * _curvature_diag(prob)))


def mc_marginalized_regularizer(prob: GlmProblem, p: float, q: float, n_samples: int,
                                rng: RngStream, eps: float = DEFAULT_EPS) -> PenaltyReport:
    """
    Monte-Carlo estimate of R(beta) next to its closed-form approximation.

    Each draw samples a scaled mask (1/p with probability p, else 0) for every entry
    of X, and contributes sum_i A(x~_i . beta) - A(x_i . beta).
    """
    if n_samples < 100:
        raise ConfigError(f"n_samples must be at least 100, got {n_samples}")
    _check_open_retention(p)
    run_id = uuid.uuid4()
    n, d = prob.X.shape
    a_clean, _, _ = log_partition(prob.family, prob.eta)
    base = float(np.sum(a_clean))

    draws = np.empty(n_samples)
    done = 0
    while done < n_samples:
        chunk = min(_MC_CHUNK, n_samples - done)
        masks = sample_bernoulli(chunk * n, d, p, rng).reshape(chunk, n, d) / p
        noisy = bridgeout_feature_noise(prob.X, prob.beta, masks, q, eps)
        eta_noisy = noisy @ prob.beta
        a_noisy, _, _ = log_partition(prob.family, eta_noisy)
        draws[done:done + chunk] = a_noisy.sum(axis=1) - base
        done += chunk

    r_hat, gamma_diag = bridge_penalty_closed_form(prob, p, q)
    report = PenaltyReport(
        family=prob.family,
        p=p,
        q=q,
        closed_form=r_hat,
        mc_estimate=float(np.mean(draws)),
        mc_stderr=float(np.std(draws, ddof=1) / np.sqrt(n_samples)),
        n_samples=n_samples,
        gamma_diag=[float(g) for g in gamma_diag],
    )
    logger.debug("Marginalized regularizer estimated", extra={
        'run_id': run_id,
        'count': n_samples
    })
    return report


def random_problem(family: Family, n: int, d: int, rng: RngStream, beta_scale: float = 1.0) -> GlmProblem:
    """Random GLM problem with Gaussian design and coefficients scaled to max |beta| = beta_scale"""
    X = rng.normal((n, d))
    beta = rng.normal(d)
    beta = beta_scale * beta / np.max(np.abs(beta))
    if family == "linear":
        y = X @ beta + rng.normal(n)
    else:
        y = (rng.uniform(0.0, 1.0, n) < expit(X @ beta)).astype(np.float64)
    return GlmProblem(X, y, beta, family)
