"""Random ratio search through the same clamp and reward path as the agent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..environ.budget import check_budget_feasible, clamp_plan
from ..environ.rewards import compute_reward
from ..errors import ConfigError
from ..netmodel import total_flops
from .policies import PolicyPlan


@dataclass(frozen=True)
class RandomOutcome:
    """Best plan found plus the per-episode trace."""

    best: PolicyPlan
    trace: tuple[dict, ...]


def random_search(evaluator, episodes: int, seed: int, constraint: str = "none",
                  alpha: float | None = None, a_floor: float = 0.05,
                  reward: str = "err", protocol: str | None = None) -> RandomOutcome:
    """Draw uniform per-layer ratios, clamp them like the agent, keep the best."""
    if episodes < 1:
        raise ConfigError(f"episodes must be positive, got {episodes}")
    if constraint not in ("none", "flops_budget"):
        raise ConfigError(f"unknown constraint {constraint!r}")
    if (constraint == "flops_budget") != (alpha is not None):
        raise ConfigError("alpha is required with flops_budget and only then")
    network = evaluator.network
    ts = network.prunable_ts()
    if not ts:
        raise ConfigError("network has no prunable layers")
    if constraint == "flops_budget":
        check_budget_feasible(network, alpha, a_floor, evaluator.accounting)

    rng = np.random.Generator(np.random.PCG64(seed))
    f_total = float(total_flops(network))
    best: PolicyPlan | None = None
    trace = []
    for episode in range(episodes):
        requested = [float(a) for a in rng.uniform(a_floor, 1.0, size=len(ts))]
        if constraint == "flops_budget":
            clamped, tight = clamp_plan(network, requested, alpha, a_floor,
                                        evaluator.accounting)
        else:
            clamped, tight = list(requested), False
        error = float(evaluator.evaluate(clamped))
        flops = float(evaluator.flops(clamped))
        r = compute_reward(reward, error, flops)
        if best is None or r > best.reward:
            best = PolicyPlan("random", tuple(clamped), flops, flops / f_total,
                              error, r)
        trace.append({
            "episode": episode,
            "actions": requested,
            "clamped": clamped,
            "flops": flops,
            "flops_fraction": flops / f_total,
            "error": error,
            "reward": r,
            "best_so_far": best.reward,
            "budget_tight": tight,
            "protocol": protocol,
        })
    return RandomOutcome(best, tuple(trace))
