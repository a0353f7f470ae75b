from .oracle import (
    GlmProblem,
    log_partition,
    noise_variance,
    bridgeout_feature_noise,
    bridge_penalty_closed_form,
    bridge_penalty_per_sample,
    bridge_penalty_gamma_form,
    dropout_ridge_penalty,
    mc_marginalized_regularizer,
    random_problem,
)

__all__ = [
    'GlmProblem', 'log_partition', 'noise_variance', 'bridgeout_feature_noise',
    'bridge_penalty_closed_form', 'bridge_penalty_per_sample', 'bridge_penalty_gamma_form', 'dropout_ridge_penalty',
    'mc_marginalized_regularizer', 'random_problem',
]
