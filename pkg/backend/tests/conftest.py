"""
pytest configuration for bridgelab tests
"""
import gzip
import struct
import sys
from pathlib import Path

import numpy as np
import pytest

# Add repository root to path so backend.services imports work
repo_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(repo_root))

from backend.services.common.models import RegularizerConfig  # noqa: E402
from backend.services.network import init_network  # noqa: E402
from backend.services.tensor.core import RngStream  # noqa: E402


@pytest.fixture
def rng() -> RngStream:
    """Seeded root stream"""
    return RngStream(7)


@pytest.fixture
def small_network():
    """Factory for small Xavier-initialized networks"""
    def build(widths=(4, 3, 2), activation="sigmoid", regularizer=None, output="softmax",
              loss_kind="cross_entropy", seed=11):
        regularizer = regularizer or RegularizerConfig()
        n_layers = len(widths) - 1
        activations = [activation] * (n_layers - 1) + [output]
        return init_network(list(widths), activations, [regularizer] * n_layers, loss_kind, RngStream(seed))
    return build


def idx_bytes(data: np.ndarray, type_code: int = 0x08) -> bytes:
    """Serialize an array in the IDX layout"""
    dtypes = {0x08: ">u1", 0x09: ">i1", 0x0B: ">i2", 0x0C: ">i4", 0x0D: ">f4", 0x0E: ">f8"}
    header = struct.pack(">HBB", 0, type_code, data.ndim)
    header += struct.pack(f">{data.ndim}I", *data.shape)
    return header + np.asarray(data).astype(dtypes[type_code]).tobytes()


@pytest.fixture
def write_idx(tmp_path):
    """Write an IDX file (optionally gzipped) under tmp_path and return its path"""
    def write(name: str, data: np.ndarray, type_code: int = 0x08, compress: bool = False) -> Path:
        raw = idx_bytes(np.asarray(data), type_code)
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(gzip.compress(raw) if compress else raw)
        return path
    return write


@pytest.fixture
def fake_mnist(tmp_path, write_idx):
    """Tiny MNIST-layout dataset: 60 training images (50 pool + 10 val) and 20 test images"""
    def build(dataset: str = "mnist", n_train: int = 60, n_test: int = 20, seed: int = 3) -> Path:
        gen = np.random.default_rng(seed)
        write_idx(f"{dataset}/train-images-idx3-ubyte", gen.integers(0, 256, (n_train, 28, 28)))
        write_idx(f"{dataset}/train-labels-idx1-ubyte", np.arange(n_train) % 10)
        write_idx(f"{dataset}/t10k-images-idx3-ubyte.gz", gen.integers(0, 256, (n_test, 28, 28)), compress=True)
        write_idx(f"{dataset}/t10k-labels-idx1-ubyte.gz", np.arange(n_test) % 10, compress=True)
        return tmp_path
    return build
