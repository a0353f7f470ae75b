"""
Dense feedforward networks with perturbed-weight forward and backward passes

A layer computes nu = a_in @ W~.T + b with W of shape (outputs, inputs); inputs are
row-per-example batches. In train mode every regularized layer draws a fresh mask set
(or takes a fixed one) and the trace keeps exactly the masks the backward pass uses.
Per-example masks turn W~ into an (n, k, d) stack contracted row by row.
"""
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import expit, log_expit, log_softmax, softmax

from ..common.errors import ConfigError, ContractError, ShapeError
from ..common.models import RegularizerConfig
from ..regularize.perturbation import (
    MaskSet,
    activation_scale,
    perturb,
    sample_masks,
    weight_grad_factor,
)
from ..tensor.core import RngStream, as_matrix

Activation = Literal["sigmoid", "relu", "softmax", "identity"]
LossKind = Literal["cross_entropy", "mse"]
Mode = Literal["train", "eval"]

ACTIVATIONS = ("sigmoid", "relu", "softmax", "identity")
LOSSES = ("cross_entropy", "mse")


@dataclass
class Layer:
    """Dense layer: weights (k x d), bias (k), activation and regularizer"""
    weights: np.ndarray
    bias: np.ndarray
    activation: Activation = "sigmoid"
    regularizer: RegularizerConfig = field(default_factory=RegularizerConfig)

    def __post_init__(self):
        self.weights = as_matrix(self.weights, "weights").copy()
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(-1).copy()
        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError.mismatch("bias", self.bias.shape, (self.weights.shape[0],))
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"Unknown activation: {self.activation}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class Network:
    """Ordered dense layers plus a loss kind"""
    layers: list[Layer]
    loss: LossKind = "cross_entropy"

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("a network needs at least one layer")
        if self.loss not in LOSSES:
            raise ConfigError(f"Unknown loss: {self.loss}")
        for l in range(1, len(self.layers)):
            if self.layers[l].in_dim != self.layers[l - 1].out_dim:
                raise ShapeError(
                    f"layer {l} expects {self.layers[l].in_dim} inputs but layer {l - 1} "
                    f"produces {self.layers[l - 1].out_dim}"
                )
        for layer in self.layers[:-1]:
            if layer.activation == "softmax":
                raise ConfigError("softmax is only allowed on the final layer")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def copy(self) -> "Network":
        return Network(
            [Layer(l.weights.copy(), l.bias.copy(), l.activation, l.regularizer) for l in self.layers],
            self.loss,
        )


@dataclass
class ForwardTrace:
    """Everything a backward pass needs from the paired forward pass"""
    mode: Mode
    inputs: list[np.ndarray]  # a^{l-1} as fed into layer l (activation dropout applied)
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]
    perturbed_weights: list[np.ndarray]
    masks: list[Optional[MaskSet]]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]

    @property
    def batch_size(self) -> int:
        return self.inputs[0].shape[0]


@dataclass
class LayerGradient:
    """dJ/dW and dJ/db for one layer"""
    weights: np.ndarray
    bias: np.ndarray


class GradientSummary(NamedTuple):
    mean: float
    mean_abs: float


def _activate(kind: str, nu: np.ndarray) -> np.ndarray:
    if kind == "sigmoid":
        return expit(nu)
    if kind == "relu":
        return np.maximum(nu, 0.0)
    if kind == "softmax":
        return softmax(nu, axis=1)
    return nu


def _activation_backward(kind: str, nu: np.ndarray, a: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Map dJ/da to dJ/dnu"""
    if kind == "sigmoid":
        return grad * a * (1.0 - a)
    if kind == "relu":
        # subgradient 0 at nu == 0
        return grad * (nu > 0.0)
    if kind == "softmax":
        return a * (grad - np.sum(grad * a, axis=1, keepdims=True))
    return grad


def forward(net: Network, batch: np.ndarray, mode: Mode = "train", rng: Optional[RngStream] = None,
            fixed_masks: Optional[Sequence[Optional[MaskSet]]] = None) -> ForwardTrace:
    """
    Run the network on a batch.

    In eval mode the raw weights are used. In train mode each regularized layer uses
    ``fixed_masks[l]`` when given, otherwise draws a fresh mask set from ``rng``.
    """
    if mode not in ("train", "eval"):
        raise ConfigError(f"Unknown mode: {mode}")
    a = as_matrix(batch, "batch")
    if a.shape[1] != net.input_dim:
        raise ShapeError(f"batch has {a.shape[1]} columns, network expects {net.input_dim}")
    if fixed_masks is not None and len(fixed_masks) != len(net.layers):
        raise ShapeError(f"got {len(fixed_masks)} mask sets for {len(net.layers)} layers")

    trace = ForwardTrace(mode, [], [], [], [], [])
    for l, layer in enumerate(net.layers):
        cfg = layer.regularizer
        masks = None
        if mode == "train" and cfg.kind != "none":
            if fixed_masks is not None:
                masks = fixed_masks[l]
                if masks is None:
                    raise ContractError(f"layer {l} is regularized but its fixed mask set is None")
            elif rng is None:
                raise ContractError(f"layer {l} is regularized; train mode needs an RngStream")
            else:
                masks = sample_masks(cfg, layer.weights.shape, a.shape[0], rng)

        scale = activation_scale(cfg, masks)
        if scale is not None:
            if scale.shape != a.shape:
                raise ShapeError.mismatch(f"layer {l} activation mask", scale.shape, a.shape)
            a_in = a * scale
        else:
            a_in = a

        w_tilde = perturb(cfg, layer.weights, masks)
        if w_tilde.ndim == 3:
            if w_tilde.shape[0] != a_in.shape[0]:
                raise ShapeError(
                    f"layer {l} has {w_tilde.shape[0]} per-example masks for {a_in.shape[0]} rows"
                )
            nu = np.einsum("nd,nkd->nk", a_in, w_tilde) + layer.bias
        else:
            nu = a_in @ w_tilde.T + layer.bias
        a = _activate(layer.activation, nu)

        trace.inputs.append(a_in)
        trace.pre_activations.append(nu)
        trace.activations.append(a)
        trace.perturbed_weights.append(w_tilde)
        trace.masks.append(masks)
    return trace


def _check_targets(trace: ForwardTrace, targets: np.ndarray) -> np.ndarray:
    y = as_matrix(targets, "targets")
    if y.shape != trace.output.shape:
        raise ShapeError.mismatch("targets", y.shape, trace.output.shape)
    return y


def _check_probabilistic_output(net: Network):
    if net.layers[-1].activation not in ("softmax", "sigmoid"):
        raise ContractError(
            f"cross-entropy needs probability outputs, final activation is {net.layers[-1].activation}"
        )


def loss(net: Network, trace: ForwardTrace, targets: np.ndarray) -> float:
    """Mean cross-entropy (softmax or sigmoid outputs) or mean squared error"""
    y = _check_targets(trace, targets)
    nu = trace.pre_activations[-1]
    if net.loss == "mse":
        return float(np.mean((trace.output - y) ** 2))

    _check_probabilistic_output(net)
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise ContractError("cross-entropy targets must lie in [0, 1]")
    if net.layers[-1].activation == "softmax":
        per_example = -np.sum(y * log_softmax(nu, axis=1), axis=1)
    else:
        per_example = -np.sum(y * log_expit(nu) + (1.0 - y) * log_expit(-nu), axis=1)
    return float(np.mean(per_example))


def _output_delta(net: Network, trace: ForwardTrace, y: np.ndarray) -> np.ndarray:
    n = y.shape[0]
    last = net.layers[-1]
    if net.loss == "cross_entropy":
        _check_probabilistic_output(net)
        # fused softmax/sigmoid + cross-entropy
        return (trace.output - y) / n
    grad = 2.0 * (trace.output - y) / y.size
    return _activation_backward(last.activation, trace.pre_activations[-1], trace.output, grad)


def backward(net: Network, trace: ForwardTrace, targets: np.ndarray) -> list[LayerGradient]:
    """Gradients of the loss with respect to every layer's weights and bias"""
    y = _check_targets(trace, targets)
    if len(trace.inputs) != len(net.layers):
        raise ShapeError(f"trace has {len(trace.inputs)} layers, network has {len(net.layers)}")

    delta = _output_delta(net, trace, y)
    grads: list[Optional[LayerGradient]] = [None] * len(net.layers)
    for l in reversed(range(len(net.layers))):
        layer = net.layers[l]
        masks = trace.masks[l]
        factor = weight_grad_factor(layer.regularizer, layer.weights, masks)
        if factor is not None and factor.ndim == 3:
            grad_w = np.einsum("nk,nd,nkd->kd", delta, trace.inputs[l], factor)
        else:
            grad_w = delta.T @ trace.inputs[l]
            if factor is not None:
                grad_w = grad_w * factor
        grads[l] = LayerGradient(grad_w, delta.sum(axis=0))

        if l > 0:
            w_tilde = trace.perturbed_weights[l]
            grad_a = np.einsum("nk,nkd->nd", delta, w_tilde) if w_tilde.ndim == 3 else delta @ w_tilde
            scale = activation_scale(layer.regularizer, masks)
            if scale is not None:
                grad_a = grad_a * scale
            prev = net.layers[l - 1]
            delta = _activation_backward(
                prev.activation, trace.pre_activations[l - 1], trace.activations[l - 1], grad_a
            )
    return grads


def finite_diff_grad(net: Network, batch: np.ndarray, targets: np.ndarray,
                     fixed_masks: Optional[Sequence[Optional[MaskSet]]] = None,
                     h: float = 1e-5) -> list[LayerGradient]:
    """Central differences of the loss with the masks frozen across all evaluations"""
    if h <= 0:
        raise ConfigError(f"step h must be positive, got {h}")
    regularized = any(layer.regularizer.kind != "none" for layer in net.layers)
    if regularized and fixed_masks is None:
        raise ContractError("finite differences of a regularized network need fixed masks")
    mode = "train" if fixed_masks is not None else "eval"
    work = net.copy()

    def objective() -> float:
        return loss(work, forward(work, batch, mode, fixed_masks=fixed_masks), targets)

    def central(param: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(param)
        for idx in np.ndindex(param.shape):
            orig = param[idx]
            param[idx] = orig + h
            f_plus = objective()
            param[idx] = orig - h
            f_minus = objective()
            param[idx] = orig
            grad[idx] = (f_plus - f_minus) / (2.0 * h)
        return grad

    return [LayerGradient(central(layer.weights), central(layer.bias)) for layer in work.layers]


def avg_layer_gradient(gradients: Sequence[LayerGradient], l: int) -> GradientSummary:
    """Signed mean and mean absolute value of dJ/dW over one layer's weights"""
    if not 0 <= l < len(gradients):
        raise ConfigError(f"layer index {l} out of range for {len(gradients)} layers")
    g = gradients[l].weights
    return GradientSummary(float(np.mean(g)), float(np.mean(np.abs(g))))


def predict(net: Network, batch: np.ndarray) -> np.ndarray:
    """Eval-mode outputs"""
    return forward(net, batch, "eval").output


def error_rate(outputs: np.ndarray, targets: np.ndarray) -> float:
    """Misclassification rate in percent (argmax for one-hot, 0.5 threshold for one column)"""
    outputs = as_matrix(outputs, "outputs")
    targets = as_matrix(targets, "targets")
    if outputs.shape != targets.shape:
        raise ShapeError.mismatch("targets", targets.shape, outputs.shape)
    if outputs.shape[1] == 1:
        wrong = (outputs[:, 0] >= 0.5) != (targets[:, 0] >= 0.5)
    else:
        wrong = np.argmax(outputs, axis=1) != np.argmax(targets, axis=1)
    return float(100.0 * np.mean(wrong))


def xavier_uniform(fan_in: int, fan_out: int, rng: RngStream) -> np.ndarray:
    """Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(...)) weights of shape (fan_out, fan_in)"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, (fan_out, fan_in))


def init_network(sizes: Sequence[int], activations: Sequence[str],
                 regularizers: Sequence[RegularizerConfig], loss_kind: LossKind,
                 rng: RngStream) -> Network:
    """Xavier-initialized network with zero biases"""
    n_layers = len(sizes) - 1
    if n_layers < 1 or len(activations) != n_layers or len(regularizers) != n_layers:
        raise ConfigError(
            f"{len(sizes)} sizes need {n_layers} activations and regularizers, "
            f"got {len(activations)} and {len(regularizers)}"
        )
    layers = [
        Layer(xavier_uniform(sizes[l], sizes[l + 1], rng), np.zeros(sizes[l + 1]),
              activations[l], regularizers[l])
        for l in range(n_layers)
    ]
    return Network(layers, loss_kind)
