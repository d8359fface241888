"""Reward schemes: plain negative error and log-FLOPs-scaled error."""

from __future__ import annotations

import math


def _check_error(error: float) -> float:
    error = float(error)
    if not 0.0 <= error <= 1.0:
        raise ValueError(f"error {error} outside [0, 1]")
    return error


def reward_err(error: float) -> float:
    """Reward is the negated validation error."""
    return -_check_error(error)


def reward_flops(error: float, flops: float) -> float:
    """Reward is -error * ln(flops); smaller models score higher at equal error."""
    error = _check_error(error)
    if flops < 2:
        raise ValueError(f"flops {flops} must be at least 2")
    return -error * math.log(flops)


def compute_reward(kind: str, error: float, flops: float) -> float:
    """Dispatch on the reward kind {err, flops}."""
    if kind == "err":
        return reward_err(error)
    if kind == "flops":
        return reward_flops(error, flops)
    raise ValueError(f"unknown reward kind {kind!r}")
