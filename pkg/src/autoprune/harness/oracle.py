"""Exact grid optimum for the linear-accounting proxy via pareto DP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..environ.rewards import reward_err
from ..errors import ConfigError
from ..evaluators.proxy import ProxyModel, proxy_evaluate

GRID_STEP = 0.05


@dataclass(frozen=True)
class DpResult:
    """Optimal grid ratios with the error and reward they achieve."""

    ratios: tuple[float, ...]
    error: float
    reward: float


def dp_oracle(model: ProxyModel, alpha: float, grid_step: float = GRID_STEP,
              fixed_flops: float = 0.0) -> DpResult:
    """Minimize proxy error over grid ratios subject to the FLOPs budget.

    Ratios come from the grid {grid_step, 2*grid_step, ..., 1}; the budget is
    sum f_t * a_t + fixed_flops <= alpha * (sum f_t + fixed_flops).  Exact via
    a pareto frontier over integer weights f_t * k, so every non-dominated
    (cost, error) prefix survives.  Raises ConfigError when even the grid
    minimum on every layer overshoots the budget.
    """
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha {alpha} outside (0, 1]")
    if fixed_flops < 0.0:
        raise ConfigError("fixed_flops must be non-negative")
    steps = round(1.0 / grid_step)
    if steps < 1 or abs(steps * grid_step - 1.0) > 1e-9:
        raise ConfigError(f"grid step {grid_step} must divide 1")

    f = np.asarray(model.layer_flops, dtype=np.float64)
    ks = np.arange(1, steps + 1, dtype=np.float64)
    grid = ks / steps
    penalties = np.asarray(model.sensitivities)[:, None] * (1.0 - grid[None, :]) ** model.exponent
    weights = f[:, None] * ks[None, :]

    # budget in integer-weight units: sum f_t * k_t <= capacity
    capacity = alpha * (float(f.sum()) + fixed_flops) * steps - fixed_flops * steps
    tol = 1e-9 * max(capacity, 1.0)

    frontier_w = np.zeros(1)
    frontier_e = np.zeros(1)
    frontier_k: list[tuple[int, ...]] = [()]
    for t in range(len(f)):
        w = (frontier_w[:, None] + weights[t][None, :]).ravel()
        e = (frontier_e[:, None] + penalties[t][None, :]).ravel()
        choices = [kk + (k,) for kk in frontier_k for k in range(1, steps + 1)]
        # every remaining layer needs at least weight f_u (its k = 1 entry)
        feasible = w <= capacity + tol - float(f[t + 1:].sum())
        if not feasible.any():
            raise ConfigError(
                f"budget fraction {alpha} infeasible even at the grid minimum {grid[0]}")
        w, e = w[feasible], e[feasible]
        choices = [c for c, ok in zip(choices, feasible) if ok]
        order = np.lexsort((e, w))
        w, e = w[order], e[order]
        choices = [choices[i] for i in order]
        running = np.minimum.accumulate(e)
        keep = np.empty(len(e), dtype=bool)
        keep[0] = True
        keep[1:] = e[1:] < running[:-1]
        frontier_w, frontier_e = w[keep], e[keep]
        frontier_k = [c for c, ok in zip(choices, keep) if ok]

    best = frontier_k[-1]
    ratios = tuple(k / steps for k in best)
    error = proxy_evaluate(model, ratios)
    return DpResult(ratios, error, reward_err(error))
