#!/usr/bin/env python3
"""
Experiment runner - command-line entry point for trials, sweeps and oracle checks
"""
import argparse
import sys
import uuid
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from backend.services.common.config import get_experiment_presets, get_settings
from backend.services.common.errors import BridgeLabError, ConfigError
from backend.services.common.logger import get_logger
from backend.services.common.models import ExperimentConfig, RegularizerConfig
from backend.services.experiments import (
    TrialRunner,
    Sweeper,
    aggregate,
    export_config_echo,
    export_gradient_log,
    export_summary,
    export_trial,
    random_gradcheck,
    resolve_config,
    write_histograms,
)
from backend.services.glm import mc_marginalized_regularizer, random_problem
from backend.services.network import export_weights
from backend.services.tensor.core import RngStream, Streams

logger = get_logger("experiment_runner")

# argparse dest -> flat config key
FLAG_KEYS = {
    'data_dir': 'data_dir',
    'out_dir': 'out_dir',
    'dataset': 'dataset',
    'regularizer': 'regularizer',
    'p': 'p',
    'q': 'q',
    'c': 'c',
    'dropout_mode': 'dropout_mode',
    'unbiased_shakeout': 'unbiased_shakeout',
    'mask_per_example': 'mask_per_example',
    'subset_size': 'subset_size',
    'optimizer': 'optimizer',
    'lr': 'learning_rate',
    'batch_size': 'batch_size',
    'epochs': 'epochs',
    'max_norm_t': 'max_norm_t',
    'max_norm_mode': 'max_norm_mode',
    'gradient_reduction': 'gradient_reduction',
    'hidden_activation': 'hidden_activation',
}


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def flag_overrides(args: argparse.Namespace) -> dict:
    """Flat config values for the flags the user actually passed"""
    overrides = {
        key: getattr(args, dest)
        for dest, key in FLAG_KEYS.items()
        if getattr(args, dest, None) is not None
    }
    if getattr(args, 'seed', None):
        overrides['seeds'] = args.seed
    return overrides


def resolve_from_args(args: argparse.Namespace, kind: Optional[str] = None,
                      extra: Optional[dict] = None) -> ExperimentConfig:
    overrides = flag_overrides(args)
    overrides.update(extra or {})
    return resolve_config(kind or args.kind, args.config, overrides)


def output_dir(cfg: ExperimentConfig, *parts: str) -> Path:
    base = Path(cfg.out_dir or get_settings().out_dir)
    return base.joinpath(cfg.kind, *parts)


def run_train(args: argparse.Namespace, run_id: uuid.UUID) -> int:
    """One trial per seed, each in its own directory; summary when several seeds"""
    cfg = resolve_from_args(args)
    out = output_dir(cfg)
    runner = TrialRunner(run_id)
    results = []
    for seed in cfg.seeds:
        seed_dir = out / f"seed_{seed}"
        trial = runner.run(cfg, seed)
        export_trial(trial, seed_dir / "trial.json")
        export_config_echo(cfg.echo(), seed_dir / "config.txt")
        export_gradient_log(trial, seed_dir / "gradients.csv")
        write_histograms(trial.weight_histograms, seed_dir / "histograms.csv")
        export_weights(runner.network, seed_dir / "weights")
        results.append(trial)
        print(f"seed={seed} regularizer={trial.regularizer} train_loss={trial.final_train_loss:.6g} "
              f"val_error={trial.final_val_error} test_error={trial.final_test_error}")

    if len(results) >= 2 and all(r.final_test_error is not None for r in results):
        mean, stderr = aggregate(results)
        rows = [{'seed': r.seed, 'test_error': r.final_test_error} for r in results]
        rows.append({'seed': 'mean', 'test_error': mean})
        rows.append({'seed': 'stderr', 'test_error': stderr})
        export_summary(rows, out / "summary.csv")
        print(f"test_error mean={mean:.6g} stderr={stderr:.6g} n={len(results)}")
    return 0


def run_sweep(args: argparse.Namespace, run_id: uuid.UUID) -> int:
    cfg = resolve_from_args(args)
    sweeper = Sweeper(run_id)
    if args.random:
        result = sweeper.random(cfg, args.random)
    else:
        result = sweeper.grid(cfg, args.p_grid, args.second_grid)

    out = output_dir(cfg, f"sweep_{cfg.regularizer.kind}")
    rows = [
        {'p': pt.p, 'second': pt.second, 'mean_val_error': pt.mean_val_error,
         'stderr_val_error': pt.stderr_val_error}
        for pt in result.points
    ]
    export_summary(rows, out / "sweep_points.csv")
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(
        result.model_dump_json(indent=2, exclude={'trials': {'__all__': {'wall_time_s'}}}) + "\n",
        encoding='utf-8',
    )
    best = result.best
    second = f" {result.second_name}={best.second:g}" if result.second_name else ""
    print(f"best p={best.p:g}{second} mean_val_error={best.mean_val_error:.6g}")
    return 0


def run_table1(args: argparse.Namespace, run_id: uuid.UUID) -> int:
    """Plain GD, Dropout, Shakeout and Bridgeout on the sparse logistic problem"""
    presets = get_experiment_presets()
    n_trials = args.trials or presets.get("table1_trials", 20)
    first_seed = args.seed[0] if args.seed else get_settings().default_seed
    seeds = list(range(first_seed, first_seed + n_trials))

    rows = []
    runner = TrialRunner(run_id)
    for arm in presets["table1_arms"]:
        extra = {('regularizer' if k == 'kind' else k): v for k, v in arm.items()}
        extra['seeds'] = seeds
        cfg = resolve_from_args(args, "table1", extra)
        results = [runner.run(cfg, seed) for seed in seeds]
        mean, stderr = aggregate(results)
        rows.append({'regularizer': cfg.regularizer.label, 'mean_test_error': mean,
                     'stderr_test_error': stderr, 'trials': len(results)})
        print(f"{cfg.regularizer.label:<28} {mean:8.4f} +- {stderr:.4f}")

    export_summary(rows, output_dir(cfg) / "table1.csv")
    return 0


def run_hist(args: argparse.Namespace, run_id: uuid.UUID) -> int:
    """Weight histograms for one config, or for bridgeout at each of --q-list"""
    kind = args.kind or "sparsity_hist"
    variants = [("run", {})]
    if args.q_list:
        variants = [(f"q_{q:g}", {'regularizer': 'bridgeout', 'q': q}) for q in args.q_list]

    rows = []
    runner = TrialRunner(run_id)
    for name, extra in variants:
        cfg = resolve_from_args(args, kind, extra)
        seed = cfg.seeds[0]
        trial = runner.run(cfg, seed)
        out = output_dir(cfg, name)
        write_histograms(trial.weight_histograms, out / "histograms.csv")
        export_weights(runner.network, out / "weights")
        export_config_echo(cfg.echo(), out / "config.txt")
        encoder = trial.weight_histograms[0]
        rows.append({'variant': name, 'regularizer': trial.regularizer,
                     'near_zero_fraction': encoder.near_zero_fraction, 'max_abs': encoder.max_abs})
        print(f"{trial.regularizer:<28} near_zero_fraction={encoder.near_zero_fraction:.4f}")

    export_summary(rows, output_dir(cfg) / "near_zero_summary.csv")
    return 0


def run_glm_check(args: argparse.Namespace, run_id: uuid.UUID) -> int:
    seed = args.seed[0] if args.seed else get_settings().default_seed
    stream = RngStream(seed).split(Streams.GLM)
    problem = random_problem(args.family, args.n, args.d, stream.split(1), args.beta_scale)
    p = args.p if args.p is not None else 0.5
    q = args.q if args.q is not None else 1.0
    report = mc_marginalized_regularizer(problem, p, q, args.n_samples, stream.split(2))
    logger.info("GLM check finished", extra={'run_id': run_id, 'seed': seed, 'count': args.n_samples})
    print(report.to_record())
    if args.out_dir:
        out = Path(args.out_dir) / "glm_check.txt"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.to_record() + "\n", encoding='utf-8')
    return 0


def run_gradcheck(args: argparse.Namespace, run_id: uuid.UUID) -> int:
    seed = args.seed[0] if args.seed else get_settings().default_seed
    values = {'kind': args.regularizer or "none", 'p': args.p, 'q': args.q, 'c': args.c,
              'dropout_mode': args.dropout_mode, 'unbiased_shakeout': args.unbiased_shakeout,
              'mask_per_example': args.mask_per_example}
    try:
        regularizer = RegularizerConfig(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise ConfigError(f"Invalid regularizer: {e}") from e
    report = random_gradcheck(args.widths, args.hidden_activation or "sigmoid", regularizer, seed,
                              args.batch, run_id=run_id)
    print(report.to_record())
    return 0 if report.max_relative_error < args.tol else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, action='append', help="Seed (repeat for several)")
    common.add_argument('--config', type=Path, help="Flat key=value or YAML config file")
    common.add_argument('--data-dir', type=Path, help="Directory holding the IDX files")
    common.add_argument('--out-dir', type=Path, help="Directory for result files")
    common.add_argument('--kind', choices=['table1', 'sparsity_hist', 'autoencoder_hist', 'mnist_dnn'])
    common.add_argument('--dataset', choices=['synthetic', 'mnist', 'fashion_mnist'])
    common.add_argument('--regularizer', choices=['none', 'dropout', 'shakeout', 'bridgeout'])
    common.add_argument('--p', type=float, help="Retention probability")
    common.add_argument('--q', type=float, help="Bridge power")
    common.add_argument('--c', type=float, help="Shakeout L1 strength")
    common.add_argument('--dropout-mode', choices=['activation', 'weight'])
    common.add_argument('--unbiased-shakeout', action='store_const', const=True)
    common.add_argument('--mask-per-example', action='store_const', const=True,
                        help="Draw weight and unit masks per example")
    common.add_argument('--subset-size', type=int)
    common.add_argument('--optimizer', choices=['sgd', 'adam'])
    common.add_argument('--lr', type=float)
    common.add_argument('--batch-size', type=int)
    common.add_argument('--epochs', type=int)
    common.add_argument('--max-norm-t', type=float)
    common.add_argument('--max-norm-mode', choices=['clamp', 'row'])
    common.add_argument('--gradient-reduction', choices=['mean', 'sum'])
    common.add_argument('--hidden-activation', choices=['sigmoid', 'relu', 'identity'])

    parser = argparse.ArgumentParser(description="Bridgeout / Dropout / Shakeout experiment runner")
    sub = parser.add_subparsers(dest='command', required=True)

    train = sub.add_parser('train', parents=[common], help="Train one trial per seed")
    train.set_defaults(func=run_train)

    sweep = sub.add_parser('sweep', parents=[common], help="Grid or random hyperparameter search")
    sweep.add_argument('--p-grid', type=parse_floats)
    sweep.add_argument('--second-grid', type=parse_floats, help="q grid (bridgeout) or c grid (shakeout)")
    sweep.add_argument('--random', type=int, help="Random search with this many draws")
    sweep.set_defaults(func=run_sweep)

    table1 = sub.add_parser('table1', parents=[common], help="Sparse logistic regression comparison")
    table1.add_argument('--trials', type=int)
    table1.set_defaults(func=run_table1)

    hist = sub.add_parser('hist', parents=[common], help="Weight histograms and near-zero fractions")
    hist.add_argument('--q-list', type=parse_floats, help="Run bridgeout once per q")
    hist.set_defaults(func=run_hist)

    glm = sub.add_parser('glm-check', parents=[common], help="Closed-form vs Monte-Carlo GLM penalty")
    glm.add_argument('--family', choices=['linear', 'logistic'], default='logistic')
    glm.add_argument('--n', type=int, default=50)
    glm.add_argument('--d', type=int, default=5)
    glm.add_argument('--n-samples', type=int, default=20000)
    glm.add_argument('--beta-scale', type=float, default=0.1)
    glm.set_defaults(func=run_glm_check)

    grad = sub.add_parser('gradcheck', parents=[common], help="Backward pass vs finite differences")
    grad.add_argument('--widths', type=parse_ints, default=[5, 4, 3])
    grad.add_argument('--batch', type=int, default=4)
    grad.add_argument('--tol', type=float, default=1e-4)
    grad.set_defaults(func=run_gradcheck)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    run_id = uuid.uuid4()
    logger.info(f"Starting {args.command}", extra={'run_id': run_id})

    try:
        code = args.func(args, run_id)
    except BridgeLabError as e:
        logger.error(f"{args.command} failed: {e}", extra={'run_id': run_id})
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command} failed: invalid config", extra={'run_id': run_id})
        print(f"error: {e}", file=sys.stderr)
        return ConfigError.exit_code

    logger.info(f"Finished {args.command}", extra={'run_id': run_id})
    return code


if __name__ == "__main__":
    sys.exit(main())
