"""Shared numeric plumbing for the differentiable core."""

import numpy as np

from ..errors import ShapeError

# Row-major 64-bit floats throughout; an ndarray carries the (shape, flat
# data) pair directly.
Tensor = np.ndarray


def as_tensor(x) -> Tensor:
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


def mse_loss(pred: Tensor, target: Tensor) -> tuple[float, Tensor]:
    """Mean squared error over every element, plus its gradient in pred."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction shape {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff)), (2.0 / diff.size) * diff
