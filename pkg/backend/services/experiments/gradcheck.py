"""
Analytic backward pass versus central finite differences on a small random network
"""
import uuid
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..common.errors import ConfigError
from ..common.logger import get_logger
from ..common.models import RegularizerConfig
from ..network import Network, backward, finite_diff_grad, forward, init_network
from ..tensor.core import RngStream, Streams

logger = get_logger("gradcheck")

SMALL_WEIGHT = 1e-3
BIAS_SCALE = 0.5


@dataclass
class GradCheckReport:
    max_relative_error: float
    n_compared: int
    n_excluded: int

    def to_record(self) -> str:
        return (f"max_relative_error={self.max_relative_error:.6g} "
                f"compared={self.n_compared} excluded={self.n_excluded}")


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor), elementwise"""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def with_random_biases(net: Network, rng: RngStream, scale: float = BIAS_SCALE) -> Network:
    """
    Replace every bias with N(0, scale^2) draws, in place.

    Zero biases put pre-activations exactly on the ReLU kink whenever a mask removes
    all of a unit's inputs; random offsets keep them off it.
    """
    for layer in net.layers:
        layer.bias = scale * rng.normal(layer.out_dim)
    return net


def compare_gradients(net: Network, batch: np.ndarray, targets: np.ndarray,
                      rng: RngStream, h: float = 1e-5) -> GradCheckReport:
    """
    Draw one mask set, then compare backward() against finite differences under it.

    Bridgeout weights with |w| < 1e-3 are skipped when q < 2, where the gradient
    factor's negative power makes differences ill-conditioned.
    """
    trace = forward(net, batch, "train", rng)
    analytic = backward(net, trace, targets)
    numeric = finite_diff_grad(net, batch, targets, fixed_masks=trace.masks, h=h)

    worst, compared, excluded = 0.0, 0, 0
    for layer, a_grad, n_grad in zip(net.layers, analytic, numeric):
        reg = layer.regularizer
        keep = np.ones(layer.weights.shape, dtype=bool)
        if reg.kind == "bridgeout" and reg.q < 2.0:
            keep = np.abs(layer.weights) >= SMALL_WEIGHT
        pairs = [(a_grad.weights[keep], n_grad.weights[keep]), (a_grad.bias, n_grad.bias)]
        excluded += int(np.sum(~keep))
        for a, n in pairs:
            if a.size:
                worst = max(worst, float(np.max(relative_error(a, n))))
                compared += a.size
    return GradCheckReport(worst, compared, excluded)


def random_gradcheck(widths: Sequence[int], activation: str, regularizer: RegularizerConfig,
                     seed: int, batch_size: int = 4, h: float = 1e-5,
                     run_id: Optional[uuid.UUID] = None) -> GradCheckReport:
    """Random softmax classifier with the given widths (input first, classes last)"""
    if len(widths) < 2:
        raise ConfigError(f"need at least input and output widths, got {list(widths)}")
    run_id = run_id or uuid.uuid4()
    root = RngStream(seed)
    n_layers = len(widths) - 1
    activations = [activation] * (n_layers - 1) + ["softmax"]
    init = root.split(Streams.INIT)
    net = init_network(widths, activations, [regularizer] * n_layers, "cross_entropy", init)
    with_random_biases(net, init.split(1))

    data = root.split(Streams.DATA)
    batch = data.normal((batch_size, widths[0]))
    labels = data.integers(0, widths[-1], batch_size)
    targets = np.eye(widths[-1])[labels]

    report = compare_gradients(net, batch, targets, root.split(Streams.MASKS), h)
    logger.info(f"Gradient check: {report.to_record()}", extra={
        'run_id': run_id,
        'seed': seed,
        'regularizer': regularizer.label,
        'count': report.n_compared
    })
    return report
