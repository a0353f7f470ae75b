"""
Dataset containers
"""
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from ..common.errors import ShapeError
from ..tensor.core import as_matrix

Split = Literal["train", "val", "test"]


@dataclass(frozen=True)
class Dataset:
    """Inputs (n x d) and targets (n x k) for one split"""
    inputs: np.ndarray
    targets: np.ndarray
    name: str
    split: Split = "train"

    def __post_init__(self):
        inputs = as_matrix(self.inputs, "inputs")
        targets = np.asarray(self.targets, dtype=np.float64)
        if targets.ndim == 1:
            targets = targets.reshape(-1, 1)
        if inputs.shape[0] != targets.shape[0]:
            raise ShapeError(
                f"{self.name}/{self.split}: {inputs.shape[0]} input rows but {targets.shape[0]} target rows"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    def subset(self, idx: np.ndarray, split: Optional[Split] = None) -> "Dataset":
        return Dataset(self.inputs[idx], self.targets[idx], self.name, split or self.split)


@dataclass(frozen=True)
class DataSplits:
    """Train / validation / test bundle; validation and test may be absent"""
    train: Dataset
    val: Optional[Dataset] = None
    test: Optional[Dataset] = None
