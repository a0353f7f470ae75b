"""
Hyperparameter search over (p, q) for bridgeout, (p, c) for shakeout and p for dropout

Selection looks only at validation error; test data is never evaluated.
"""
import uuid
from typing import Optional, Sequence

from ..common.config import get_sweep_grids
from ..common.errors import ConfigError
from ..common.logger import get_logger
from ..common.models import ExperimentConfig, RegularizerConfig, SweepPoint, SweepResult, TrialResult
from ..tensor.core import RngStream, Streams
from .runner import KIND_HEADS, TrialRunner, mean_and_stderr

logger = get_logger("sweep")

SECOND_PARAM = {"bridgeout": "q", "shakeout": "c", "dropout": None}


def second_param(kind: str) -> Optional[str]:
    if kind not in SECOND_PARAM:
        raise ConfigError(f"nothing to sweep for regularizer {kind}")
    return SECOND_PARAM[kind]


def select_best(points: Sequence[SweepPoint]) -> SweepPoint:
    """Lowest mean validation error; ties go to larger p, then larger q (or c)"""
    if not points:
        raise ConfigError("no sweep points to select from")
    return min(points, key=lambda pt: (pt.mean_val_error, -pt.p, -(pt.second or 0.0)))


def default_grids(kind: str) -> tuple[list[float], Optional[list[float]]]:
    grids = get_sweep_grids()["grids"]
    name = second_param(kind)
    return list(grids["p"]), (list(grids[name]) if name else None)


class Sweeper:
    """Runs every (p, second) point over the config's seeds and keeps the best"""

    def __init__(self, run_id: uuid.UUID = None):
        self.run_id = run_id or uuid.uuid4()
        self.grids = get_sweep_grids()

    def prepare(self, cfg: ExperimentConfig) -> ExperimentConfig:
        """Make sure the config has a classification validation split"""
        if not KIND_HEADS[cfg.kind][2]:
            raise ConfigError(f"sweeps select on validation error; {cfg.kind} has none")
        second_param(cfg.regularizer.kind)
        if cfg.dataset == "synthetic" and cfg.n_val == 0:
            return cfg.model_copy(update={'n_val': self.grids.get("synthetic_n_val", 1000)})
        return cfg

    def point_config(self, cfg: ExperimentConfig, p: float, second: Optional[float]) -> ExperimentConfig:
        values = cfg.regularizer.model_dump()
        values['p'] = p
        name = second_param(cfg.regularizer.kind)
        if name and second is not None:
            values[name] = second
        return cfg.model_copy(update={'regularizer': RegularizerConfig.model_validate(values)})

    def evaluate(self, cfg: ExperimentConfig, p: float, second: Optional[float],
                 trials: list[TrialResult]) -> SweepPoint:
        point_cfg = self.point_config(cfg, p, second)
        runner = TrialRunner(self.run_id)
        results = [runner.run(point_cfg, seed, evaluate_test=False) for seed in cfg.seeds]
        trials.extend(results)
        errors = [r.final_val_error for r in results]
        if len(errors) >= 2:
            mean, stderr = mean_and_stderr(errors)
        else:
            mean, stderr = errors[0], None
        logger.info(f"Sweep point {point_cfg.regularizer.label}", extra={
            'run_id': self.run_id,
            'regularizer': point_cfg.regularizer.label,
            'val_error': mean
        })
        return SweepPoint(p=p, second=second, mean_val_error=mean, stderr_val_error=stderr,
                          seeds=list(cfg.seeds))

    def _search(self, cfg: ExperimentConfig, candidates: list[tuple[float, Optional[float]]]) -> SweepResult:
        cfg = self.prepare(cfg)
        trials: list[TrialResult] = []
        points = [self.evaluate(cfg, p, second, trials) for p, second in candidates]
        best = select_best(points)
        logger.info(f"Sweep finished over {len(points)} points", extra={
            'run_id': self.run_id,
            'count': len(points),
            'val_error': best.mean_val_error
        })
        return SweepResult(
            regularizer=cfg.regularizer.kind,
            second_name=second_param(cfg.regularizer.kind),
            points=points,
            best=best,
            trials=trials,
        )

    def grid(self, cfg: ExperimentConfig, p_grid: Optional[Sequence[float]] = None,
             second_grid: Optional[Sequence[float]] = None) -> SweepResult:
        """Exhaustive search over p_grid x second_grid"""
        default_p, default_second = default_grids(cfg.regularizer.kind)
        p_grid = list(p_grid) if p_grid is not None else default_p
        if not p_grid:
            raise ConfigError("p grid must be nonempty")
        if second_param(cfg.regularizer.kind) is None:
            seconds = [None]
        else:
            seconds = list(second_grid) if second_grid is not None else default_second
            if not seconds:
                raise ConfigError("second grid must be nonempty")
        return self._search(cfg, [(p, s) for p in p_grid for s in seconds])

    def random(self, cfg: ExperimentConfig, n_draws: Optional[int] = None,
               seed: Optional[int] = None) -> SweepResult:
        """Uniform random search over the configured ranges with a draw budget"""
        n_draws = n_draws or self.grids.get("random_draws", 30)
        if n_draws < 1:
            raise ConfigError(f"random search needs at least one draw, got {n_draws}")
        ranges = self.grids["ranges"]
        rng = RngStream(cfg.seeds[0] if seed is None else seed).split(Streams.SWEEP)
        ps = rng.uniform(*ranges["p"], n_draws)
        name = second_param(cfg.regularizer.kind)
        seconds = rng.uniform(*ranges[name], n_draws) if name else [None] * n_draws
        candidates = [(float(p), None if s is None else float(s)) for p, s in zip(ps, seconds)]
        return self._search(cfg, candidates)


def sweep(cfg: ExperimentConfig, p_grid: Optional[Sequence[float]] = None,
          second_grid: Optional[Sequence[float]] = None, run_id: Optional[uuid.UUID] = None) -> SweepResult:
    """Grid search; defaults come from sweeps.yaml"""
    return Sweeper(run_id).grid(cfg, p_grid, second_grid)
