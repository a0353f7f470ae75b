from .core import (
    RngStream,
    Streams,
    as_matrix,
    matmul,
    signed_power,
    sign_of,
    sample_bernoulli,
    DEFAULT_EPS,
)

__all__ = [
    'RngStream', 'Streams', 'as_matrix', 'matmul', 'signed_power', 'sign_of',
    'sample_bernoulli', 'DEFAULT_EPS',
]
