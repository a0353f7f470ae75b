from .perturbation import (
    MaskSet,
    sample_masks,
    perturb_dropout,
    perturb_shakeout,
    perturb_bridgeout,
    bridgeout_weight_grad_factor,
    unit_weight_grad_factor,
    expected_perturbation,
    perturb,
    weight_grad_factor,
    activation_scale,
)

__all__ = [
    'MaskSet', 'sample_masks', 'perturb_dropout', 'perturb_shakeout', 'perturb_bridgeout',
    'bridgeout_weight_grad_factor', 'unit_weight_grad_factor', 'expected_perturbation',
    'perturb', 'weight_grad_factor', 'activation_scale',
]
