from .dataset import Dataset, DataSplits
from .synthetic import gen_linear_regression, gen_sparse_logit, sparse_logit_score
from .idx_loader import load_idx, parse_idx
from .splits import normalize_and_split, load_mnist, expected_files, one_hot, SUBSET_SIZES

__all__ = [
    'Dataset', 'DataSplits', 'gen_linear_regression', 'gen_sparse_logit', 'sparse_logit_score',
    'load_idx', 'parse_idx', 'normalize_and_split', 'load_mnist', 'expected_files', 'one_hot',
    'SUBSET_SIZES',
]
