"""Dense-tensor numerics: layers, networks, losses, optimizers, gradient oracle."""

from .functional import LOG_FLOOR, check_simplex, cross_entropy, entropy, softmax_t
from .gradcheck import grad_check, relative_error
from .layers import LayerSpec, conv2d, dense, flatten, maxpool2x2, relu
from .network import Network, build_network, lenet5_half_specs, lenet5_specs
from .optim import Adam, Sgd, make_optimizer, optimizer_step

__all__ = [
    "LOG_FLOOR",
    "Adam",
    "LayerSpec",
    "Network",
    "Sgd",
    "build_network",
    "check_simplex",
    "conv2d",
    "cross_entropy",
    "dense",
    "entropy",
    "flatten",
    "grad_check",
    "lenet5_half_specs",
    "lenet5_specs",
    "make_optimizer",
    "maxpool2x2",
    "optimizer_step",
    "relative_error",
    "relu",
    "softmax_t",
]
