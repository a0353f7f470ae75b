"""
Configuration management for bridgelab
"""
import yaml
from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache

from .errors import ConfigError

REPO_ROOT = Path(__file__).parent.parent.parent.parent


class Settings(BaseSettings):
    """Process-level settings"""
    model_config = SettingsConfigDict(
        env_prefix="BRIDGELAB_",
        env_file=REPO_ROOT / ".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Paths
    config_dir: Path = Path(__file__).parent.parent.parent / "configs"
    data_dir: Path = REPO_ROOT / "data"  # IDX files (user supplied)
    out_dir: Path = REPO_ROOT / "results"

    # Numerics
    power_eps: float = 1e-8  # floor for |w| under negative exponents
    max_norm_t: float = 3.5

    # Experiments
    default_seed: int = 7

    # Logging
    log_level: str = "INFO"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


@lru_cache()
def load_yaml_config(filename: str) -> dict:
    """Load YAML configuration file from the config directory"""
    settings = get_settings()
    config_path = settings.config_dir / filename

    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    with open(config_path, 'r') as f:
        return yaml.safe_load(f)


def get_experiment_presets() -> dict:
    """Get per-kind experiment presets"""
    return load_yaml_config("experiments.yaml")


def get_sweep_grids() -> dict:
    """Get default hyperparameter grids"""
    return load_yaml_config("sweeps.yaml")


def get_preset(kind: str) -> dict:
    """Get the preset for one experiment kind"""
    presets = get_experiment_presets().get("experiments", {})
    if kind not in presets:
        raise ConfigError(f"Unknown experiment kind: {kind}")
    return presets[kind]


def load_flat_config(path: Path) -> dict:
    """
    Load a flat experiment config file.

    Accepts YAML ``key: value`` mappings or ``key=value`` lines; values are YAML-typed.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    text = path.read_text(encoding="utf-8")
    try:
        parsed = yaml.safe_load(text)
    except yaml.YAMLError:
        parsed = None

    if isinstance(parsed, dict):
        values = parsed
    else:
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = yaml.safe_load(value.strip()) if value.strip() else None

    nested = [k for k, v in values.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"{path}: config must be flat, nested keys: {nested}")
    return {k.replace("-", "_"): v for k, v in values.items()}
