"""
Synthetic datasets: Gaussian linear regression and the sparse logistic problem
"""
import numpy as np

from ..tensor.core import RngStream
from .dataset import Dataset, DataSplits

# f(x) = 2 x0 + 4 x1 + 4 x2 - 4.8; the remaining predictors are noise
SPARSE_LOGIT_COEFS = np.array([2.0, 4.0, 4.0])
SPARSE_LOGIT_OFFSET = -4.8


def gen_linear_regression(n: int = 400, d: int = 100, out: int = 10, *, rng: RngStream,
                          noise_sigma: float = 0.0) -> tuple[Dataset, np.ndarray]:
    """X ~ N(0, 1) of shape (n, d), W ~ N(0, 1) of shape (d, out), y = X W (+ noise)"""
    X = rng.normal((n, d))
    true_weights = rng.normal((d, out))
    y = X @ true_weights
    if noise_sigma > 0:
        y = y + noise_sigma * rng.normal((n, out))
    return Dataset(X, y, "linear_regression", "train"), true_weights


def sparse_logit_score(x: np.ndarray) -> np.ndarray:
    """f(x) for rows of x"""
    x = np.asarray(x, dtype=np.float64)
    return x[:, :3] @ SPARSE_LOGIT_COEFS + SPARSE_LOGIT_OFFSET


def _sparse_logit_split(n: int, n_features: int, rng: RngStream, split: str) -> Dataset:
    x = rng.integers(0, 2, (n, n_features)).astype(np.float64)
    # sgn(f) mapped to {0, 1}; f is never 0 on binary inputs
    labels = (sparse_logit_score(x) > 0).astype(np.float64).reshape(-1, 1)
    return Dataset(x, labels, "sparse_logit", split)


def gen_sparse_logit(n_train: int = 400, n_test: int = 3000, *, rng: RngStream, n_val: int = 0,
                     n_features: int = 20) -> DataSplits:
    """Uniform binary inputs labelled by the sign of f(x); each split has its own stream"""
    train = _sparse_logit_split(n_train, n_features, rng.split(1), "train")
    val = _sparse_logit_split(n_val, n_features, rng.split(2), "val") if n_val > 0 else None
    test = _sparse_logit_split(n_test, n_features, rng.split(3), "test") if n_test > 0 else None
    return DataSplits(train=train, val=val, test=test)
