"""
Dense matrix helpers and the deterministic random source shared by every module

Matrices are float64 numpy arrays with exactly two dimensions.
"""
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..common.errors import ConfigError, ShapeError

DEFAULT_EPS = 1e-8


class Streams(IntEnum):
    """Stream discriminators for the purposes randomness is used for"""
    INIT = 1
    DATA = 2
    SHUFFLE = 3
    MASKS = 4
    GLM = 5
    SWEEP = 6


@dataclass(frozen=True)
class RngStream:
    """
    Counter-based random stream keyed by (seed, stream_id).

    Backed by numpy's Philox generator seeded through a SeedSequence whose spawn key
    is the stream path, so identical keys give identical draws on every platform and
    distinct keys give independent sequences. A stream is single-owner: share it
    across threads only by splitting.
    """
    seed: int
    stream_id: int = 0
    parent: tuple[int, ...] = ()
    _generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or any(k < 0 for k in self.key):
            raise ConfigError(f"seed and stream ids must be non-negative, got {self.seed}, {self.key}")
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        object.__setattr__(self, "_generator", np.random.Generator(np.random.Philox(seq)))

    @property
    def key(self) -> tuple[int, ...]:
        return self.parent + (int(self.stream_id),)

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def split(self, stream_id: int) -> "RngStream":
        """Derive an independent child stream"""
        return RngStream(self.seed, int(stream_id), self.key)

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        return self._generator.uniform(low, high, size)

    def normal(self, size) -> np.ndarray:
        return self._generator.standard_normal(size)

    def integers(self, low: int, high: int, size) -> np.ndarray:
        return self._generator.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array"""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with a shape check"""
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return a @ b


def signed_power(w: np.ndarray, exponent: float, eps: float = DEFAULT_EPS) -> np.ndarray:
    """
    Elementwise |w| ** exponent.

    For negative exponents |w| is floored at ``eps`` first so the result stays finite
    at w = 0; non-negative exponents are evaluated exactly.
    """
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    magnitude = np.abs(np.asarray(w, dtype=np.float64))
    if exponent < 0:
        magnitude = np.maximum(magnitude, eps)
    return np.power(magnitude, exponent)


def sign_of(w: np.ndarray) -> np.ndarray:
    """Elementwise sign with sgn(0) = 0"""
    return np.sign(np.asarray(w, dtype=np.float64))


def sample_bernoulli(rows: int, cols: int, p: float, rng: RngStream) -> np.ndarray:
    """Matrix of independent {0, 1} draws, each 1 with probability p"""
    if not 0.0 < p <= 1.0:
        raise ConfigError(f"Bernoulli probability must lie in (0, 1], got {p}")
    if rows < 1 or cols < 1:
        raise ShapeError(f"mask shape must be positive, got ({rows}, {cols})")
    return (rng.generator.random((rows, cols)) < p).astype(np.float64)
