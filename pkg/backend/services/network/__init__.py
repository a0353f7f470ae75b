from .model import (
    Layer,
    Network,
    ForwardTrace,
    LayerGradient,
    GradientSummary,
    forward,
    backward,
    loss,
    finite_diff_grad,
    avg_layer_gradient,
    predict,
    error_rate,
    xavier_uniform,
    init_network,
)
from .export import export_weights, load_weights

__all__ = [
    'Layer', 'Network', 'ForwardTrace', 'LayerGradient', 'GradientSummary', 'forward',
    'backward', 'loss', 'finite_diff_grad', 'avg_layer_gradient', 'predict', 'error_rate',
    'xavier_uniform', 'init_network', 'export_weights', 'load_weights',
]
