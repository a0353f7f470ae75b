"""
Unit tests for Pydantic models, settings and structured logging
"""
import json
import logging
from uuid import uuid4

import pytest
from pydantic import ValidationError

# Import from services (path is set up in conftest.py)
from backend.services.common.config import Settings, get_preset, load_flat_config
from backend.services.common.errors import ConfigError, DivergenceError, IdxParseError
from backend.services.common.logger import StructuredFormatter
from backend.services.common.models import (
    ExperimentConfig,
    PenaltyReport,
    RegularizerConfig,
    TrainConfig,
    TrialResult,
)


def test_regularizer_defaults():
    """Test RegularizerConfig defaults"""
    cfg = RegularizerConfig()
    assert cfg.kind == "none"
    assert cfg.p == 0.5
    assert cfg.eps == 1e-8
    assert cfg.label == "none"


def test_regularizer_labels():
    """Test human-readable labels"""
    assert RegularizerConfig(kind="bridgeout", p=0.5, q=1.0).label == "bridgeout(p=0.5,q=1)"
    assert RegularizerConfig(kind="shakeout", p=0.5, c=0.3).label == "shakeout(p=0.5,c=0.3)"
    assert RegularizerConfig(kind="dropout", p=0.7).label == "dropout(p=0.7)"


def test_regularizer_validation():
    """Test RegularizerConfig bounds"""
    with pytest.raises(ValidationError):
        RegularizerConfig(p=0.0)
    with pytest.raises(ValidationError):
        RegularizerConfig(q=0.0)
    with pytest.raises(ValidationError):
        RegularizerConfig(c=-0.1)
    with pytest.raises(ValidationError):
        RegularizerConfig(kind="bridgeout", power=2)


def test_train_config_validation():
    """Test TrainConfig bounds"""
    assert TrainConfig().max_norm_t == 3.5
    with pytest.raises(ValidationError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValidationError):
        TrainConfig(beta1=1.0)
    with pytest.raises(ValidationError):
        TrainConfig(max_norm_t=-1.0)


def test_experiment_seeds():
    """Seeds must be nonempty and distinct"""
    with pytest.raises(ValidationError):
        ExperimentConfig(kind="table1", seeds=[])
    with pytest.raises(ValidationError):
        ExperimentConfig(kind="table1", seeds=[1, 1])


def test_experiment_echo():
    """Echo flattens nested configs into key=value lines"""
    echo = ExperimentConfig(kind="table1", regularizer=RegularizerConfig(kind="dropout")).echo()
    lines = echo.splitlines()
    assert "kind=table1" in lines
    assert "regularizer.kind=dropout" in lines
    assert "train.optimizer=sgd" in lines


def test_trial_result_bounds_and_json():
    """Error rates are percentages; wall time stays out of the JSON"""
    cfg = ExperimentConfig(kind="table1")
    with pytest.raises(ValidationError):
        TrialResult(kind="table1", seed=1, regularizer="none", final_test_error=120.0, config=cfg)
    trial = TrialResult(kind="table1", seed=1, regularizer="none", final_test_error=2.5,
                        config=cfg, wall_time_s=12.0)
    data = json.loads(trial.to_json())
    assert "wall_time_s" not in data
    assert data["final_test_error"] == 2.5


def test_penalty_report_record():
    """Test PenaltyReport line format"""
    report = PenaltyReport(family="logistic", p=0.5, q=1.0, closed_form=0.25, mc_estimate=0.24,
                           mc_stderr=0.01, n_samples=1000, gamma_diag=[1.0, 2.0])
    assert report.to_record() == (
        "family=logistic p=0.5 q=1 closed_form=0.25 mc_estimate=0.24 "
        "mc_stderr=0.01 n_samples=1000 gamma_diag=1,2"
    )


class TestConfigFiles:
    """Test settings, presets and flat config files"""

    def test_settings_env_override(self, monkeypatch):
        monkeypatch.setenv("BRIDGELAB_DEFAULT_SEED", "11")
        monkeypatch.setenv("BRIDGELAB_MAX_NORM_T", "2.0")
        settings = Settings()
        assert settings.default_seed == 11
        assert settings.max_norm_t == 2.0

    def test_presets_exist(self):
        for kind in ("table1", "sparsity_hist", "autoencoder_hist", "mnist_dnn"):
            assert "train" in get_preset(kind)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            get_preset("cifar")

    def test_key_value_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nregularizer=bridgeout\np=0.4\nmax-norm-t=null\nseed=[1, 2]\n")
        values = load_flat_config(path)
        assert values == {"regularizer": "bridgeout", "p": 0.4, "max_norm_t": None, "seed": [1, 2]}

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("regularizer: shakeout\nc: 0.3\n")
        assert load_flat_config(path) == {"regularizer": "shakeout", "c": 0.3}

    def test_nested_rejected(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("train:\n  epochs: 3\n")
        with pytest.raises(ConfigError):
            load_flat_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_flat_config(tmp_path / "absent.cfg")


class TestErrors:
    """Test error messages and exit codes"""

    def test_exit_codes(self):
        assert ConfigError("x").exit_code == 2
        assert IdxParseError("bad", 3).exit_code == 3
        assert DivergenceError("nan", 1, 0).exit_code == 4

    def test_idx_offset_in_message(self):
        assert "byte offset 17" in str(IdxParseError("truncated data", 17, "f.idx"))

    def test_divergence_with_config(self):
        err = DivergenceError("non-finite loss", 3, 2).with_config("kind=table1")
        assert err.epoch == 3 and err.batch == 2
        assert "kind=table1" in str(err)


def test_structured_formatter():
    """Log lines are JSON with the extra fields"""
    run_id = uuid4()
    record = logging.LogRecord("bridgelab.test", logging.INFO, __file__, 1, "hello %s", ("world",), None)
    record.service = "test"
    record.run_id = run_id
    record.seed = 7
    data = json.loads(StructuredFormatter().format(record))
    assert data["message"] == "hello world"
    assert data["service"] == "test"
    assert data["run_id"] == str(run_id)
    assert data["seed"] == 7
    assert data["timestamp"].endswith("Z")
