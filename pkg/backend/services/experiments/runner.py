"""
Trial runner - builds data and network for one experiment config and trains it
"""
import time
import uuid
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..common.config import get_settings
from ..common.errors import ConfigError, DivergenceError, ShapeError
from ..common.logger import get_logger
from ..common.models import ExperimentConfig, RegularizerConfig, TrialResult
from ..data import Dataset, DataSplits, gen_linear_regression, gen_sparse_logit, load_mnist
from ..network import Network, error_rate, forward, init_network, loss
from ..optim import Trainer
from ..tensor.core import RngStream, Streams
from .exports import weight_histogram

logger = get_logger("trial_runner")

# kind -> (output activation, loss, is classification)
KIND_HEADS = {
    "table1": ("sigmoid", "cross_entropy", True),
    "sparsity_hist": ("identity", "mse", False),
    "autoencoder_hist": ("sigmoid", "mse", False),
    "mnist_dnn": ("softmax", "cross_entropy", True),
}


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard error (sample std / sqrt(n))"""
    if len(values) < 2:
        raise ConfigError(f"need at least 2 values for a standard error, got {len(values)}")
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))


def aggregate(results: Sequence[TrialResult], metric: str = "final_test_error") -> tuple[float, float]:
    """Mean and standard error of a final metric over trials"""
    if len(results) < 2:
        raise ConfigError(f"aggregate needs at least 2 results, got {len(results)}")
    values = [getattr(r, metric) for r in results]
    if any(v is None for v in values):
        raise ConfigError(f"{metric} is missing from some results")
    return mean_and_stderr(values)


def _as_autoencoder(dataset: Optional[Dataset]) -> Optional[Dataset]:
    if dataset is None:
        return None
    return Dataset(dataset.inputs, dataset.inputs, dataset.name, dataset.split)


class TrialRunner:
    """Runs seeded trials of one experiment config"""

    def __init__(self, run_id: uuid.UUID = None):
        self.run_id = run_id or uuid.uuid4()
        self.settings = get_settings()
        self.network: Optional[Network] = None
        self.splits: Optional[DataSplits] = None

    def build_data(self, cfg: ExperimentConfig, rng: RngStream) -> DataSplits:
        if cfg.kind == "table1":
            return gen_sparse_logit(cfg.n_train, cfg.n_test, rng=rng, n_val=cfg.n_val,
                                    n_features=cfg.n_features)
        if cfg.kind == "sparsity_hist":
            dataset, _ = gen_linear_regression(cfg.n_train, cfg.n_features, cfg.n_outputs, rng=rng,
                                               noise_sigma=cfg.noise_sigma)
            return DataSplits(train=dataset)

        if cfg.dataset == "synthetic":
            raise ConfigError(f"{cfg.kind} needs an image dataset, got synthetic")
        data_dir = Path(cfg.data_dir or self.settings.data_dir)
        splits = load_mnist(data_dir, cfg.subset_size or cfg.n_train, rng, cfg.dataset)
        if cfg.kind == "autoencoder_hist":
            return DataSplits(_as_autoencoder(splits.train), _as_autoencoder(splits.val),
                              _as_autoencoder(splits.test))
        return splits

    def build_network(self, cfg: ExperimentConfig, splits: DataSplits, rng: RngStream) -> Network:
        output_activation, loss_kind, _ = KIND_HEADS[cfg.kind]
        n_in, n_out = splits.train.inputs.shape[1], splits.train.targets.shape[1]
        if (n_in, n_out) != (cfg.n_features, cfg.n_outputs):
            raise ShapeError.mismatch(f"{cfg.kind} data (inputs, outputs)", (n_in, n_out),
                                      (cfg.n_features, cfg.n_outputs))
        sizes = [n_in, *cfg.hidden_widths, n_out]
        n_hidden = len(cfg.hidden_widths)
        activations = [cfg.hidden_activation] * n_hidden + [output_activation]
        none = RegularizerConfig()
        # with no hidden layers the single layer is the one being regularized
        regularizers = [cfg.regularizer] * n_hidden + [
            cfg.regularizer if cfg.regularize_output or n_hidden == 0 else none
        ]
        return init_network(sizes, activations, regularizers, loss_kind, rng)

    def _evaluate(self, net: Network, dataset: Dataset, classification: bool) -> tuple[float, Optional[float]]:
        trace = forward(net, dataset.inputs, "eval")
        err = error_rate(trace.output, dataset.targets) if classification else None
        return loss(net, trace, dataset.targets), err

    def run(self, cfg: ExperimentConfig, seed: int, evaluate_test: bool = True) -> TrialResult:
        """Train one seed; test data is only touched when ``evaluate_test`` is set"""
        started = time.perf_counter()
        root = RngStream(seed)
        _, _, classification = KIND_HEADS[cfg.kind]

        logger.info(f"Starting {cfg.kind} trial", extra={
            'run_id': self.run_id,
            'seed': seed,
            'kind': cfg.kind,
            'regularizer': cfg.regularizer.label
        })

        splits = self.build_data(cfg, root.split(Streams.DATA))
        net = self.build_network(cfg, splits, root.split(Streams.INIT))

        callbacks = []
        if splits.val is not None:
            def validate(epoch: int, current: Network) -> dict:
                val_loss, val_error = self._evaluate(current, splits.val, classification)
                return {'val_loss': val_loss, 'val_error': val_error}
            callbacks.append(validate)

        try:
            history = Trainer(cfg.train, self.run_id).train(net, splits.train, root, callbacks)
        except DivergenceError as e:
            logger.error(f"Trial diverged: {e.reason}", extra={
                'run_id': self.run_id,
                'seed': seed,
                'epoch': e.epoch,
                'batch': e.batch
            })
            raise e.with_config(cfg.echo()) from e

        train_loss, _ = self._evaluate(net, splits.train, classification)
        val_loss = val_error = None
        if splits.val is not None:
            val_loss, val_error = self._evaluate(net, splits.val, classification)
        test_loss = test_error = None
        if evaluate_test and splits.test is not None:
            test_loss, test_error = self._evaluate(net, splits.test, classification)

        histograms = [
            weight_histogram(layer.weights, cfg.histogram_bins, l, cfg.near_zero_threshold)
            for l, layer in enumerate(net.layers)
        ]
        self.network = net
        self.splits = splits

        result = TrialResult(
            kind=cfg.kind,
            seed=seed,
            regularizer=cfg.regularizer.label,
            epochs=history.epochs,
            gradient_log=history.gradient_log,
            final_train_loss=train_loss,
            final_val_loss=val_loss,
            final_val_error=val_error,
            final_test_loss=test_loss,
            final_test_error=test_error,
            weight_histograms=histograms,
            defaults=self.defaults(cfg, splits),
            config=cfg,
            wall_time_s=time.perf_counter() - started,
        )

        logger.info(f"Finished {cfg.kind} trial", extra={
            'run_id': self.run_id,
            'seed': seed,
            'train_loss': train_loss,
            'val_error': val_error,
            'test_error': test_error
        })
        return result

    def defaults(self, cfg: ExperimentConfig, splits: DataSplits) -> dict:
        """Settings the experiment relies on that are not part of the config itself"""
        output_activation, loss_kind, _ = KIND_HEADS[cfg.kind]
        return {
            'output_activation': output_activation,
            'loss': loss_kind,
            'train_rows': splits.train.n,
            'val_rows': splits.val.n if splits.val is not None else 0,
            'test_rows': splits.test.n if splits.test is not None else 0,
            'batch_size': cfg.train.batch_size or splits.train.n,
            'epochs': cfg.train.epochs,
            'learning_rate': cfg.train.learning_rate,
            'gradient_reduction': cfg.train.gradient_reduction,
            'max_norm_t': cfg.train.max_norm_t,
            'initialization': 'xavier_uniform',
        }


def run_trial(cfg: ExperimentConfig, seed: int, evaluate_test: bool = True,
              run_id: Optional[uuid.UUID] = None) -> TrialResult:
    """Build, train and evaluate one seeded trial"""
    return TrialRunner(run_id).run(cfg, seed, evaluate_test)
