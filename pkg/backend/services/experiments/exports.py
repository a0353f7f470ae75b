"""
Exporter - trial results, weight histograms and gradient logs as flat files
"""
import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from ..common.errors import ConfigError
from ..common.logger import get_logger
from ..common.models import LayerHistogram, TrialResult

logger = get_logger("exporter")

HISTOGRAM_HEADER = ["layer", "bin_center", "density"]
NEAR_ZERO_HEADER = ["layer", "near_zero_fraction", "max_abs"]
GRADIENT_HEADER = ["epoch", "layer", "mean_grad", "mean_abs_grad"]


def weight_histogram(weights: np.ndarray, bins: int, layer: int = 0,
                     threshold: float = 0.01) -> LayerHistogram:
    """
    Normalized histogram (counts / total) of one weight matrix over [-max|w|, max|w|].

    An all-zero matrix falls back to the range [-1, 1].
    """
    if bins < 10:
        raise ConfigError(f"histograms need at least 10 bins, got {bins}")
    w = np.asarray(weights, dtype=np.float64).ravel()
    max_abs = float(np.max(np.abs(w))) if w.size else 0.0
    limit = max_abs if max_abs > 0 else 1.0
    counts, edges = np.histogram(w, bins=bins, range=(-limit, limit))
    centers = (edges[:-1] + edges[1:]) / 2.0
    return LayerHistogram(
        layer=layer,
        bin_centers=centers.tolist(),
        densities=(counts / max(w.size, 1)).tolist(),
        near_zero_fraction=float(np.mean(np.abs(w) < threshold)) if w.size else 0.0,
        max_abs=max_abs,
    )


def near_zero_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_near_zero{path.suffix}")


def write_histograms(histograms: Sequence[LayerHistogram], path: Path) -> Path:
    """Write (layer, bin_center, density) rows plus the companion near-zero file"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(HISTOGRAM_HEADER)
        for hist in histograms:
            for center, density in zip(hist.bin_centers, hist.densities):
                writer.writerow([hist.layer, center, density])

    with open(near_zero_path(path), 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(NEAR_ZERO_HEADER)
        for hist in histograms:
            writer.writerow([hist.layer, hist.near_zero_fraction, hist.max_abs])

    logger.info(f"Exported {len(histograms)} weight histograms to {path}", extra={
        'count': len(histograms),
        'path': str(path)
    })
    return path


def export_weight_histogram(net, bins: int, path: Path, threshold: float = 0.01) -> list[LayerHistogram]:
    """Histogram every layer of ``net`` and write them to ``path``"""
    histograms = [
        weight_histogram(layer.weights, bins, l, threshold)
        for l, layer in enumerate(net.layers)
    ]
    write_histograms(histograms, path)
    return histograms


def export_gradient_log(trial: TrialResult, path: Path) -> Path:
    """(epoch, layer, mean_grad, mean_abs_grad) rows; header only for an empty log"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(GRADIENT_HEADER)
        for row in trial.gradient_log:
            writer.writerow([row.epoch, row.layer, row.mean_grad, row.mean_abs_grad])

    logger.info(f"Exported {len(trial.gradient_log)} gradient rows to {path}", extra={
        'seed': trial.seed,
        'count': len(trial.gradient_log),
        'path': str(path)
    })
    return path


def export_trial(trial: TrialResult, path: Path) -> Path:
    """TrialResult as JSON (byte-identical across reruns of the same seed)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(trial.to_json())
        f.write("\n")
    logger.info(f"Exported trial result to {path}", extra={
        'seed': trial.seed,
        'test_error': trial.final_test_error,
        'path': str(path)
    })
    return path


def export_config_echo(echo: str, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(echo + "\n", encoding='utf-8')
    return path


def export_summary(rows: Sequence[dict], path: Path) -> Path:
    """Write summary rows (one dict per line, keys of the first row as header)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        raise ConfigError("no summary rows to export")
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"Exported summary with {len(rows)} rows to {path}", extra={
        'count': len(rows),
        'path': str(path)
    })
    return path
