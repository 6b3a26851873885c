"""Tensor autodiff, optimizer, and seeded RNG primitives."""

from . import ops
from .gradcheck import max_relative_error, numeric_gradient
from .optim import AdamState, adam_step, warmup_lr
from .rng import SeedStream
from .tensor import (
    ShapeError,
    Tensor,
    as_tensor,
    backward,
    grad_enabled,
    no_grad,
    parameter,
    zero_grads,
)

__all__ = [
    "ops",
    "Tensor",
    "ShapeError",
    "as_tensor",
    "parameter",
    "backward",
    "no_grad",
    "grad_enabled",
    "zero_grads",
    "AdamState",
    "adam_step",
    "warmup_lr",
    "SeedStream",
    "max_relative_error",
    "numeric_gradient",
]
