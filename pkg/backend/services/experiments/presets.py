"""
Experiment config resolution: preset < config file < CLI flags
"""
import copy
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from ..common.config import get_experiment_presets, get_preset, get_settings, load_flat_config
from ..common.errors import ConfigError
from ..common.models import ExperimentConfig, RegularizerConfig, TrainConfig

REGULARIZER_KEYS = set(RegularizerConfig.model_fields) - {"kind"}
TRAIN_KEYS = set(TrainConfig.model_fields)
TOP_KEYS = set(ExperimentConfig.model_fields) - {"regularizer", "train", "seeds"}
ALIASES = {"lr": "learning_rate", "seed": "seeds"}


def _as_seed_list(value: Any) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    if isinstance(value, str):
        return [int(v) for v in value.split(",") if v.strip()]
    return [int(value)]


def apply_flat(base: dict, flat: dict) -> dict:
    """Merge flat overrides into a nested experiment dict"""
    merged = copy.deepcopy(base)
    merged.setdefault("regularizer", {})
    merged.setdefault("train", {})
    for raw_key, value in flat.items():
        key = raw_key.replace("-", "_")
        key = ALIASES.get(key, key)
        if key == "seeds":
            merged["seeds"] = _as_seed_list(value)
        elif key == "regularizer":
            merged["regularizer"]["kind"] = value
        elif key in REGULARIZER_KEYS:
            merged["regularizer"][key] = value
        elif key in TRAIN_KEYS:
            merged["train"][key] = value
        elif key in TOP_KEYS:
            merged[key] = value
        else:
            raise ConfigError(f"Unknown config key: {raw_key}")
    return merged


def subset_epochs(train_n: int) -> int:
    """Default epoch count for a classifier trained on ``train_n`` MNIST rows"""
    rule = get_experiment_presets().get("subset_epochs", {})
    threshold = rule.get("threshold", 8000)
    return rule.get("small", 30) if train_n <= threshold else rule.get("large", 15)


def resolve_config(kind: Optional[str] = None, config_file: Optional[Path] = None,
                   overrides: Optional[dict] = None) -> ExperimentConfig:
    """
    Build a validated ExperimentConfig.

    The kind comes from the overrides, then the config file, then defaults to table1.
    ``overrides`` must only hold values the user actually set (CLI flags left unset
    are dropped before calling).
    """
    settings = get_settings()
    file_values = load_flat_config(config_file) if config_file else {}
    overrides = dict(overrides or {})
    kind = kind or overrides.pop("kind", None) or file_values.pop("kind", None) or "table1"
    overrides.pop("kind", None)
    file_values.pop("kind", None)

    resolved = copy.deepcopy(get_preset(kind))
    resolved["kind"] = kind
    resolved.setdefault("regularizer", {}).setdefault("eps", settings.power_eps)
    resolved.setdefault("train", {}).setdefault("max_norm_t", settings.max_norm_t)
    resolved.setdefault("seeds", [settings.default_seed])

    resolved = apply_flat(resolved, file_values)
    resolved = apply_flat(resolved, overrides)

    if kind == "mnist_dnn" and "epochs" not in resolved["train"]:
        train_n = resolved.get("subset_size") or resolved.get("n_train", 3000)
        resolved["train"]["epochs"] = subset_epochs(train_n)

    try:
        return ExperimentConfig.model_validate(resolved)
    except ValidationError as e:
        raise ConfigError(f"Invalid {kind} config: {e}") from e
