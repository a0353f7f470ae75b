"""
Epoch/minibatch training loop
"""
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..common.errors import ConfigError, DivergenceError, ShapeError
from ..common.logger import get_logger
from ..common.models import EpochMetrics, GradientLogRow, TrainConfig
from ..data.dataset import Dataset
from ..network.model import LayerGradient, Network, avg_layer_gradient, backward, forward, loss
from ..tensor.core import RngStream, Streams
from .optimizers import Optimizer, apply_max_norm

logger = get_logger("trainer")

# (epoch, network) -> extra metrics such as val_loss / val_error
EpochCallback = Callable[[int, Network], dict]
# (epoch, batch, gradients) observer
GradientHook = Callable[[int, int, list[LayerGradient]], None]


@dataclass
class TrainingHistory:
    """Per-epoch metrics and gradient log of one training run"""
    epochs: list[EpochMetrics] = field(default_factory=list)
    gradient_log: list[GradientLogRow] = field(default_factory=list)
    steps: int = 0


class Trainer:
    """Minibatch trainer: forward(train) -> backward -> optimizer step -> max-norm"""

    def __init__(self, cfg: TrainConfig, run_id: uuid.UUID = None):
        self.cfg = cfg
        self.run_id = run_id or uuid.uuid4()

    def _check(self, net: Network, dataset: Dataset):
        if dataset.n == 0:
            raise ConfigError(f"dataset {dataset.name} is empty")
        if dataset.inputs.shape[1] != net.input_dim:
            raise ShapeError(f"dataset has {dataset.inputs.shape[1]} features, network expects {net.input_dim}")
        if dataset.targets.shape[1] != net.output_dim:
            raise ShapeError(f"dataset has {dataset.targets.shape[1]} targets, network produces {net.output_dim}")

    def train(self, net: Network, dataset: Dataset, rng: RngStream,
              callbacks: Sequence[EpochCallback] = (),
              gradient_hooks: Sequence[GradientHook] = ()) -> TrainingHistory:
        """Train ``net`` in place and return its history"""
        self._check(net, dataset)
        cfg = self.cfg
        history = TrainingHistory()
        if cfg.epochs == 0:
            return history

        n = dataset.n
        batch_size = min(cfg.batch_size or n, n)
        shuffle_rng = rng.split(Streams.SHUFFLE).split(cfg.shuffle_seed)
        mask_rng = rng.split(Streams.MASKS)
        optimizer = Optimizer(cfg)
        n_layers = len(net.layers)

        logger.info(f"Training {n_layers}-layer network on {n} examples", extra={
            'run_id': self.run_id,
            'count': cfg.epochs
        })

        for epoch in range(1, cfg.epochs + 1):
            order = shuffle_rng.permutation(n) if batch_size < n else np.arange(n)
            batch_losses = []
            grad_means = np.zeros(n_layers)
            grad_abs = np.zeros(n_layers)
            n_batches = 0

            for batch, start in enumerate(range(0, n, batch_size)):
                idx = order[start:start + batch_size]
                x, y = dataset.inputs[idx], dataset.targets[idx]

                trace = forward(net, x, "train", mask_rng)
                batch_loss = loss(net, trace, y)
                if not np.isfinite(batch_loss):
                    raise DivergenceError(f"non-finite training loss {batch_loss}", epoch, batch)

                grads = backward(net, trace, y)
                for hook in gradient_hooks:
                    hook(epoch, batch, grads)
                for l in range(n_layers):
                    summary = avg_layer_gradient(grads, l)
                    grad_means[l] += summary.mean
                    grad_abs[l] += summary.mean_abs

                scale = float(len(idx)) if cfg.gradient_reduction == "sum" else 1.0
                for l, (layer, grad) in enumerate(zip(net.layers, grads)):
                    weights = optimizer.step((l, "weights"), layer.weights, scale * grad.weights)
                    layer.weights = apply_max_norm(weights, cfg)
                    layer.bias = optimizer.step((l, "bias"), layer.bias, scale * grad.bias)
                    if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.bias))):
                        raise DivergenceError(f"non-finite parameters in layer {l}", epoch, batch)

                batch_losses.append(batch_loss)
                n_batches += 1
                history.steps += 1

            extras = {}
            for callback in callbacks:
                extras.update(callback(epoch, net))
            metrics = EpochMetrics(epoch=epoch, train_loss=float(np.mean(batch_losses)), **extras)
            history.epochs.append(metrics)
            for l in range(n_layers):
                history.gradient_log.append(GradientLogRow(
                    epoch=epoch, layer=l,
                    mean_grad=float(grad_means[l] / n_batches),
                    mean_abs_grad=float(grad_abs[l] / n_batches),
                ))

            logger.debug(f"Epoch {epoch} done", extra={
                'run_id': self.run_id,
                'epoch': epoch,
                'train_loss': metrics.train_loss,
                'val_error': metrics.val_error
            })

        logger.info(f"Training finished after {history.steps} steps", extra={
            'run_id': self.run_id,
            'train_loss': history.epochs[-1].train_loss
        })
        return history


def train(net: Network, dataset: Dataset, train_cfg: TrainConfig, rng: RngStream,
          callbacks: Sequence[EpochCallback] = (),
          gradient_hooks: Sequence[GradientHook] = (),
          run_id: Optional[uuid.UUID] = None) -> tuple[Network, TrainingHistory]:
    """Functional entry point; trains ``net`` in place and returns it with its history"""
    history = Trainer(train_cfg, run_id).train(net, dataset, rng, callbacks, gradient_hooks)
    return net, history
