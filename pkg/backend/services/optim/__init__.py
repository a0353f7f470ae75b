from .optimizers import AdamState, Optimizer, sgd_step, adam_step, max_norm_clip, max_norm_rows, apply_max_norm
from .trainer import Trainer, TrainingHistory, train

__all__ = [
    'AdamState', 'Optimizer', 'sgd_step', 'adam_step', 'max_norm_clip', 'max_norm_rows',
    'apply_max_norm', 'Trainer', 'TrainingHistory', 'train',
]
