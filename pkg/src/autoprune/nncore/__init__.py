"""Minimal differentiable numerics: dense nets, naive 2-D convolution,
mean-squared losses, sgd/adam, and a text-manifest checkpoint format."""

from .checkpoint import (
    digits_to_u128,
    load_checkpoint,
    save_checkpoint,
    u128_to_digits,
)
from .conv import ConvNet, ConvStage, conv2d, conv_backward, conv_forward, init_conv_stage
from .core import Tensor, as_tensor, mse_loss
from .mlp import ACTIVATIONS, Mlp, mlp_backward, mlp_forward
from .optim import Adam, Sgd, optimizer_step

__all__ = [
    "ACTIVATIONS", "Adam", "ConvNet", "ConvStage", "Mlp", "Sgd", "Tensor",
    "as_tensor", "conv2d", "conv_backward", "conv_forward", "digits_to_u128",
    "init_conv_stage", "load_checkpoint", "mlp_backward", "mlp_forward",
    "mse_loss", "optimizer_step", "save_checkpoint", "u128_to_digits",
]
