"""
SGD and Adam updates plus the max-norm weight constraint
"""
from dataclasses import dataclass
from typing import Hashable, Optional

import numpy as np

from ..common.errors import ConfigError, ContractError, ShapeError
from ..common.models import TrainConfig


def _check_shapes(weights: np.ndarray, grads: np.ndarray):
    if np.shape(weights) != np.shape(grads):
        raise ShapeError.mismatch("gradient", np.shape(grads), np.shape(weights))


def sgd_step(weights: np.ndarray, grads: np.ndarray, lr: float) -> np.ndarray:
    """W - lr * dJ/dW"""
    _check_shapes(weights, grads)
    return weights - lr * grads


@dataclass(frozen=True)
class AdamState:
    """First/second moment estimates and the number of steps taken"""
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, weights: np.ndarray) -> "AdamState":
        return cls(np.zeros_like(weights, dtype=np.float64), np.zeros_like(weights, dtype=np.float64), 0)


def adam_step(state: Optional[AdamState], weights: np.ndarray, grads: np.ndarray,
              cfg: TrainConfig) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update"""
    if state is None:
        raise ContractError("Adam state is not initialized (use AdamState.zeros_like)")
    _check_shapes(weights, grads)
    _check_shapes(weights, state.m)

    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (grads * grads)
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    updated = weights - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    return updated, AdamState(m, v, t)


def max_norm_clip(weights: np.ndarray, t: float) -> np.ndarray:
    """Clamp every weight into [-t, t]"""
    if t <= 0:
        raise ConfigError(f"max-norm threshold must be positive, got {t}")
    return np.clip(weights, -t, t)


def max_norm_rows(weights: np.ndarray, t: float) -> np.ndarray:
    """Rescale rows (a unit's incoming weights) whose L2 norm exceeds t"""
    if t <= 0:
        raise ConfigError(f"max-norm threshold must be positive, got {t}")
    norms = np.linalg.norm(weights, axis=1, keepdims=True)
    scale = np.where(norms > t, t / np.maximum(norms, np.finfo(np.float64).tiny), 1.0)
    return weights * scale


def apply_max_norm(weights: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    if cfg.max_norm_t is None:
        return weights
    if cfg.max_norm_mode == "row":
        return max_norm_rows(weights, cfg.max_norm_t)
    return max_norm_clip(weights, cfg.max_norm_t)


class Optimizer:
    """Applies the configured update rule to named parameters"""

    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.states: dict[Hashable, AdamState] = {}

    def step(self, key: Hashable, param: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.cfg.optimizer == "sgd":
            return sgd_step(param, grad, self.cfg.learning_rate)
        state = self.states.get(key) or AdamState.zeros_like(param)
        updated, self.states[key] = adam_step(state, param, grad, self.cfg)
        return updated
