from .presets import resolve_config, apply_flat, subset_epochs
from .exports import (
    weight_histogram,
    write_histograms,
    export_weight_histogram,
    export_gradient_log,
    export_trial,
    export_summary,
    export_config_echo,
)
from .runner import TrialRunner, run_trial, aggregate, mean_and_stderr
from .sweep import Sweeper, sweep, select_best
from .gradcheck import GradCheckReport, compare_gradients, random_gradcheck, relative_error

__all__ = [
    'resolve_config', 'apply_flat', 'subset_epochs', 'weight_histogram', 'write_histograms',
    'export_weight_histogram', 'export_gradient_log', 'export_trial', 'export_summary',
    'export_config_echo', 'TrialRunner', 'run_trial', 'aggregate', 'mean_and_stderr',
    'Sweeper', 'sweep', 'select_best', 'GradCheckReport', 'compare_gradients', 'random_gradcheck',
    'relative_error',
]
