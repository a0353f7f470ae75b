"""
Pydantic models for bridgelab configs and result records
"""
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Enums
RegularizerKind = Literal["none", "dropout", "shakeout", "bridgeout"]
DropoutMode = Literal["activation", "weight"]
OptimizerKind = Literal["sgd", "adam"]
MaxNormMode = Literal["clamp", "row"]
GradientReduction = Literal["mean", "sum"]
ExperimentKind = Literal["table1", "sparsity_hist", "autoencoder_hist", "mnist_dnn"]
DatasetName = Literal["synthetic", "mnist", "fashion_mnist"]
HiddenActivation = Literal["sigmoid", "relu", "identity"]
GlmFamily = Literal["linear", "logistic"]


# Regularization
class RegularizerConfig(BaseModel):
    """Stochastic weight-perturbation choice and its hyperparameters"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: RegularizerKind = "none"
    p: float = Field(0.5, gt=0.0, le=1.0)  # retention probability
    q: float = Field(1.0, gt=0.0)  # bridge norm power
    c: float = Field(0.0, ge=0.0)  # shakeout L1 strength
    unbiased_shakeout: bool = False
    eps: float = Field(1e-8, gt=0.0)
    dropout_mode: DropoutMode = "activation"
    mask_per_example: bool = False  # weight/unit masks drawn per example instead of per batch

    @model_validator(mode="after")
    def shakeout_needs_p_below_one(self):
        if self.kind == "shakeout" and self.p >= 1.0:
            raise ValueError("shakeout requires p < 1 (its m=1 branch divides by 1-p)")
        return self

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "dropout":
            return f"dropout(p={self.p:g})"
        if self.kind == "shakeout":
            return f"shakeout(p={self.p:g},c={self.c:g})"
        return f"bridgeout(p={self.p:g},q={self.q:g})"


# Optimization
class TrainConfig(BaseModel):
    """Optimizer and training-loop settings"""
    model_config = ConfigDict(extra="forbid")

    optimizer: OptimizerKind = "sgd"
    learning_rate: float = Field(0.001, gt=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(1e-8, gt=0.0)
    max_norm_t: Optional[float] = Field(3.5, gt=0.0)  # None disables the constraint
    max_norm_mode: MaxNormMode = "clamp"
    batch_size: Optional[int] = Field(None, ge=1)  # None means full batch
    epochs: int = Field(1, ge=0)
    shuffle_seed: int = 0
    gradient_reduction: GradientReduction = "mean"


# Experiments
class ExperimentConfig(BaseModel):
    """Declarative description of one experiment run"""
    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind
    name: Optional[str] = None

    # Dataset
    dataset: DatasetName = "synthetic"
    data_dir: Optional[Path] = None
    n_train: int = Field(400, ge=1)
    n_val: int = Field(0, ge=0)
    n_test: int = Field(3000, ge=0)
    n_features: int = Field(100, ge=1)
    n_outputs: int = Field(10, ge=1)
    noise_sigma: float = Field(0.0, ge=0.0)
    subset_size: Optional[int] = Field(None, ge=1)

    # Architecture
    hidden_widths: list[int] = Field(default_factory=list)
    hidden_activation: HiddenActivation = "sigmoid"
    regularize_output: bool = False

    regularizer: RegularizerConfig = Field(default_factory=RegularizerConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)

    seeds: list[int] = Field(default_factory=lambda: [7])
    out_dir: Optional[Path] = None
    histogram_bins: int = Field(51, ge=10)  # odd, so one bin is centered on zero
    near_zero_threshold: float = Field(0.01, gt=0.0)

    @field_validator("seeds")
    @classmethod
    def seeds_nonempty_and_distinct(cls, v):
        if not v:
            raise ValueError("seeds must be nonempty")
        if len(set(v)) != len(v):
            raise ValueError(f"seeds must be distinct, got {v}")
        return v

    @field_validator("hidden_widths")
    @classmethod
    def widths_positive(cls, v):
        if any(w < 1 for w in v):
            raise ValueError(f"hidden widths must be positive, got {v}")
        return v

    def echo(self) -> str:
        """Line-oriented key=value echo of the resolved config"""
        lines = []
        for key, value in self.model_dump(mode="json").items():
            if isinstance(value, dict):
                for sub_key, sub_value in value.items():
                    lines.append(f"{key}.{sub_key}={sub_value}")
            else:
                lines.append(f"{key}={value}")
        return "\n".join(lines)


class EpochMetrics(BaseModel):
    """Metrics recorded at the end of one epoch"""
    epoch: int
    train_loss: float
    val_loss: Optional[float] = None
    val_error: Optional[float] = Field(None, ge=0.0, le=100.0)


class GradientLogRow(BaseModel):
    """Average gradient of one layer over one epoch"""
    epoch: int
    layer: int
    mean_grad: float
    mean_abs_grad: float


class LayerHistogram(BaseModel):
    """Normalized weight histogram of one layer"""
    layer: int
    bin_centers: list[float]
    densities: list[float]
    near_zero_fraction: float = Field(..., ge=0.0, le=1.0)
    max_abs: float


class TrialResult(BaseModel):
    """Outcome of one seeded trial"""
    kind: ExperimentKind
    seed: int
    regularizer: str
    epochs: list[EpochMetrics] = Field(default_factory=list)
    gradient_log: list[GradientLogRow] = Field(default_factory=list)
    final_train_loss: Optional[float] = None
    final_val_loss: Optional[float] = None
    final_val_error: Optional[float] = Field(None, ge=0.0, le=100.0)
    final_test_loss: Optional[float] = None
    final_test_error: Optional[float] = Field(None, ge=0.0, le=100.0)
    weight_histograms: list[LayerHistogram] = Field(default_factory=list)
    defaults: dict[str, Any] = Field(default_factory=dict)
    config: ExperimentConfig
    wall_time_s: float = 0.0

    def to_json(self) -> str:
        """Reproducible serialization (wall time is excluded, it is logged instead)"""
        return self.model_dump_json(indent=2, exclude={"wall_time_s"})


class SweepPoint(BaseModel):
    """One hyperparameter grid point and its validation score"""
    p: float
    second: Optional[float] = None  # q for bridgeout, c for shakeout
    mean_val_error: float
    stderr_val_error: Optional[float] = None
    seeds: list[int]


class SweepResult(BaseModel):
    """Grid (or random) search outcome"""
    regularizer: RegularizerKind
    second_name: Optional[Literal["q", "c"]] = None
    points: list[SweepPoint]
    best: SweepPoint
    trials: list[TrialResult] = Field(default_factory=list)


# GLM oracle
class PenaltyReport(BaseModel):
    """Closed-form versus Monte-Carlo marginalized regularizer"""
    family: GlmFamily
    p: float
    q: float
    closed_form: float = Field(..., ge=0.0)
    mc_estimate: float
    mc_stderr: float = Field(..., ge=0.0)
    n_samples: int
    gamma_diag: list[float]

    def to_record(self) -> str:
        """One line of key=value pairs"""
        gamma = ",".join(f"{g:.12g}" for g in self.gamma_diag)
        return (
            f"family={self.family} p={self.p:g} q={self.q:g} "
            f"closed_form={self.closed_form:.12g} mc_estimate={self.mc_estimate:.12g} "
            f"mc_stderr={self.mc_stderr:.12g} n_samples={self.n_samples} gamma_diag={gamma}"
        )
