"""
MNIST-style normalization, one-hot labels and train/validation/test splits
"""
from pathlib import Path

import numpy as np

from ..common.errors import DataError
from ..common.logger import get_logger
from ..tensor.core import RngStream
from .dataset import Dataset, DataSplits
from .idx_loader import load_idx

logger = get_logger("splits")

MNIST_TRAIN_POOL = 50000
N_CLASSES = 10
SUBSET_SIZES = (3000, 5000, 8000, 20000, 50000)

IDX_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def expected_files(dataset: str = "mnist") -> dict[str, str]:
    """IDX filenames looked up under <data_dir>/<dataset>/ (plain or .gz)"""
    return {role: f"{dataset}/{name}" for role, name in IDX_FILES.items()}


def one_hot(labels: np.ndarray, n_classes: int = N_CLASSES) -> np.ndarray:
    labels = np.asarray(labels).reshape(-1)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes or np.any(labels != np.round(labels))):
        raise DataError(f"labels must be integers in [0, {n_classes})")
    encoded = np.zeros((labels.shape[0], n_classes))
    encoded[np.arange(labels.shape[0]), labels.astype(np.int64)] = 1.0
    return encoded


def normalize_pixels(images: np.ndarray) -> np.ndarray:
    return np.asarray(images, dtype=np.float64) / 255.0


def normalize_and_split(images: np.ndarray, labels: np.ndarray, train_n: int, rng: RngStream,
                        name: str = "mnist", train_pool: int = MNIST_TRAIN_POOL,
                        n_classes: int = N_CLASSES) -> DataSplits:
    """
    Scale pixels to [0, 1], one-hot the labels and split the training file.

    Rows [0, train_pool) form the training pool, from which ``train_n`` rows are drawn
    without replacement; the remaining rows are the full validation set.
    """
    images = np.asarray(images, dtype=np.float64)
    n_total = images.shape[0]
    if labels.shape[0] != n_total:
        raise DataError(f"{n_total} images but {labels.shape[0]} labels")
    if train_pool >= n_total:
        raise DataError(f"training pool of {train_pool} leaves no validation rows out of {n_total}")
    if not 1 <= train_n <= train_pool:
        raise DataError(f"train_n={train_n} exceeds the {train_pool}-row training pool")

    x = normalize_pixels(images)
    y = one_hot(labels, n_classes)
    subset = np.sort(rng.permutation(train_pool)[:train_n])
    train = Dataset(x[subset], y[subset], name, "train")
    val = Dataset(x[train_pool:], y[train_pool:], name, "val")
    return DataSplits(train=train, val=val)


def _find(data_dir: Path, relative: str) -> Path:
    # <data_dir>/<dataset>/<name> first, then the files directly under data_dir
    flat = relative.split("/", 1)[1]
    candidates = (data_dir / relative, data_dir / f"{relative}.gz", data_dir / flat, data_dir / f"{flat}.gz")
    for candidate in candidates:
        if candidate.exists():
            return candidate
    raise DataError(f"missing dataset file {data_dir / relative}[.gz]; expected files: "
                    f"{sorted(expected_files(relative.split('/')[0]).values())}")


def load_mnist(data_dir: Path, train_n: int, rng: RngStream, dataset: str = "mnist",
               train_pool: int = MNIST_TRAIN_POOL) -> DataSplits:
    """Train subset, validation and test splits from the four IDX files"""
    data_dir = Path(data_dir)
    files = {role: _find(data_dir, rel) for role, rel in expected_files(dataset).items()}
    splits = normalize_and_split(
        load_idx(files["train_images"]), load_idx(files["train_labels"]), train_n, rng, dataset, train_pool,
    )
    test = Dataset(
        normalize_pixels(load_idx(files["test_images"])),
        one_hot(load_idx(files["test_labels"])),
        dataset,
        "test",
    )
    logger.info(f"Loaded {dataset}: {splits.train.n} train, {splits.val.n} val, {test.n} test", extra={
        'count': splits.train.n,
        'path': str(data_dir)
    })
    return DataSplits(train=splits.train, val=splits.val, test=test)
