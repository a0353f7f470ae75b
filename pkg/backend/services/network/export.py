"""
Weight snapshot export - one CSV per layer with a declared shape header
"""
from pathlib import Path

import numpy as np

from ..common.errors import DataError
from ..common.logger import get_logger
from .model import Network

logger = get_logger("weight_export")


def export_weights(net: Network, out_dir: Path, prefix: str = "layer") -> list[Path]:
    """Write each layer's weight matrix row-major as CSV"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for l, layer in enumerate(net.layers):
        path = out_dir / f"{prefix}{l}_weights.csv"
        rows, cols = layer.weights.shape
        np.savetxt(path, layer.weights, delimiter=",", fmt="%.17g",
                   header=f"shape={rows},{cols}", comments="# ")
        paths.append(path)

    logger.info(f"Exported {len(paths)} weight snapshots to {out_dir}", extra={
        'count': len(paths),
        'path': str(out_dir)
    })
    return paths


def load_weights(path: Path) -> np.ndarray:
    """Read a snapshot written by export_weights, checking the declared shape"""
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        header = f.readline().strip()
    if not header.startswith("# shape="):
        raise DataError(f"{path}: missing shape header")
    rows, cols = (int(v) for v in header.split("=", 1)[1].split(","))
    values = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if values.shape != (rows, cols):
        raise DataError(f"{path}: declared shape ({rows}, {cols}) but read {values.shape}")
    return values
