"""
Dropout, Shakeout and Bridgeout weight perturbations

Weights are k x d (outputs x inputs). Unit masks index input units (columns), the
Bridgeout mask is a full k x d matrix. By default one mask set is drawn per layer per
minibatch; activation-form Dropout always draws one mask row per example, and
``mask_per_example`` extends that to the weight-level kinds, giving an (n, k, d) stack of
perturbed weights.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..common.errors import ConfigError, ShapeError
from ..common.models import RegularizerConfig
from ..tensor.core import DEFAULT_EPS, RngStream, as_matrix, sample_bernoulli, sign_of, signed_power


@dataclass(frozen=True)
class MaskSet:
    """Masks drawn for one layer; exactly one of the two is populated"""
    unit_mask: Optional[np.ndarray] = None
    weight_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.unit_mask is None) == (self.weight_mask is None):
            raise ConfigError("MaskSet needs exactly one of unit_mask / weight_mask")


def _check_retention(p: float, strict: bool = False):
    upper_ok = p < 1.0 if strict else p <= 1.0
    if not (p > 0.0 and upper_ok):
        bound = "(0, 1)" if strict else "(0, 1]"
        raise ConfigError(f"retention probability must lie in {bound}, got {p}")


def _unit_rows(unit_mask: np.ndarray, w: np.ndarray) -> np.ndarray:
    """(1, d) for a shared mask; (n, 1, d) when there is one row per example"""
    rows = np.asarray(unit_mask, dtype=np.float64)
    if rows.ndim < 2:
        rows = rows.reshape(1, -1)
    if rows.ndim != 2 or rows.shape[1] != w.shape[1]:
        raise ShapeError(
            f"unit mask of shape {rows.shape} does not match {w.shape[1]} weight columns"
        )
    return rows if rows.shape[0] == 1 else rows[:, None, :]


def _weight_mask(weight_mask: np.ndarray, w: np.ndarray) -> np.ndarray:
    mask = np.asarray(weight_mask, dtype=np.float64)
    if mask.ndim not in (2, 3) or mask.shape[-2:] != w.shape:
        raise ShapeError.mismatch("bridgeout mask", mask.shape, w.shape)
    return mask


def sample_masks(cfg: RegularizerConfig, weight_shape: tuple[int, int], batch_size: int,
                 rng: RngStream) -> Optional[MaskSet]:
    """Draw the mask set one layer needs for one minibatch"""
    k, d = weight_shape
    if cfg.kind == "none":
        return None
    if cfg.kind == "bridgeout":
        if cfg.mask_per_example:
            stack = sample_bernoulli(batch_size, k * d, cfg.p, rng)
            return MaskSet(weight_mask=stack.reshape(batch_size, k, d))
        return MaskSet(weight_mask=sample_bernoulli(k, d, cfg.p, rng))
    if cfg.kind == "dropout" and cfg.dropout_mode == "activation":
        return MaskSet(unit_mask=sample_bernoulli(batch_size, d, cfg.p, rng))
    rows = batch_size if cfg.mask_per_example else 1
    return MaskSet(unit_mask=sample_bernoulli(rows, d, cfg.p, rng))


def perturb_dropout(w: np.ndarray, unit_mask: np.ndarray, p: float) -> np.ndarray:
    """Zero the outgoing weights of dropped units and scale the kept ones by 1/p"""
    _check_retention(p)
    w = as_matrix(w, "weights")
    return w * (_unit_rows(unit_mask, w) / p)


def perturb_shakeout(w: np.ndarray, unit_mask: np.ndarray, p: float, c: float,
                     unbiased: bool = False) -> np.ndarray:
    """
    Shakeout perturbation.

    Dropped columns become -c*sgn(w); kept columns become w/p plus c*sgn(w) scaled by
    1/(1-p), or by (1-p)/p when ``unbiased`` (which makes the expectation equal w).
    """
    _check_retention(p, strict=True)
    if c < 0:
        raise ConfigError(f"shakeout strength c must be non-negative, got {c}")
    w = as_matrix(w, "weights")
    keep = _unit_rows(unit_mask, w) > 0
    sgn = sign_of(w)
    increment = c * (1.0 - p) / p if unbiased else c / (1.0 - p)
    return np.where(keep, w / p + increment * sgn, -c * sgn)


def perturb_bridgeout(w: np.ndarray, weight_mask: np.ndarray, p: float, q: float) -> np.ndarray:
    """W + |W|^(q/2) * (M/p - 1)"""
    _check_retention(p)
    if q <= 0:
        raise ConfigError(f"norm power q must be positive, got {q}")
    w = as_matrix(w, "weights")
    mask = _weight_mask(weight_mask, w)
    return w + signed_power(w, q / 2.0) * (mask / p - 1.0)


def bridgeout_weight_grad_factor(w: np.ndarray, weight_mask: np.ndarray, p: float, q: float,
                                 eps: float = DEFAULT_EPS) -> np.ndarray:
    """
    d(perturbed w)/dw for Bridgeout: 1 + (q/2) |w|^(q/2-1) (M/p - 1) sgn(w).

    |w| is floored at eps when q < 2; sgn(0) = 0 leaves the factor at 1 for zero weights.
    """
    _check_retention(p)
    w = as_matrix(w, "weights")
    mask = _weight_mask(weight_mask, w)
    return 1.0 + (q / 2.0) * signed_power(w, q / 2.0 - 1.0, eps) * (mask / p - 1.0) * sign_of(w)


def unit_weight_grad_factor(w: np.ndarray, unit_mask: np.ndarray, p: float) -> np.ndarray:
    """d(perturbed w)/dw for column masks: 1/p on kept columns, 0 on dropped ones"""
    w = as_matrix(w, "weights")
    rows = _unit_rows(unit_mask, w) / p
    return np.broadcast_to(rows, np.broadcast_shapes(rows.shape, w.shape)).copy()


def expected_perturbation(cfg: RegularizerConfig, w: np.ndarray) -> np.ndarray:
    """Closed-form mean of the perturbed weights over the mask distribution"""
    w = as_matrix(w, "weights")
    if cfg.kind != "shakeout" or cfg.unbiased_shakeout:
        # E[M/p] = 1 leaves the weights unchanged in expectation
        return w.copy()
    p, c = cfg.p, cfg.c
    return w + c * sign_of(w) * (p / (1.0 - p) - (1.0 - p))


def perturb(cfg: RegularizerConfig, w: np.ndarray, masks: Optional[MaskSet]) -> np.ndarray:
    """Perturbed weights used in a training forward pass"""
    if masks is None or cfg.kind == "none":
        return w
    if cfg.kind == "dropout":
        if cfg.dropout_mode == "activation":
            return w
        return perturb_dropout(w, masks.unit_mask, cfg.p)
    if cfg.kind == "shakeout":
        return perturb_shakeout(w, masks.unit_mask, cfg.p, cfg.c, cfg.unbiased_shakeout)
    return perturb_bridgeout(w, masks.weight_mask, cfg.p, cfg.q)


def weight_grad_factor(cfg: RegularizerConfig, w: np.ndarray,
                       masks: Optional[MaskSet]) -> Optional[np.ndarray]:
    """Elementwise chain factor for dJ/dW, or None when it is identically 1"""
    if masks is None or cfg.kind == "none":
        return None
    if cfg.kind == "bridgeout":
        return bridgeout_weight_grad_factor(w, masks.weight_mask, cfg.p, cfg.q, cfg.eps)
    if cfg.kind == "dropout" and cfg.dropout_mode == "activation":
        return None
    return unit_weight_grad_factor(w, masks.unit_mask, cfg.p)


def activation_scale(cfg: RegularizerConfig, masks: Optional[MaskSet]) -> Optional[np.ndarray]:
    """Per-example m/p multiplier for activation-form Dropout, else None"""
    if masks is None or cfg.kind != "dropout" or cfg.dropout_mode != "activation":
        return None
    return masks.unit_mask / cfg.p
