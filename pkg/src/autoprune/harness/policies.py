"""Handcrafted pruning baselines matched to a target FLOPs fraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..environ.rewards import compute_reward
from ..errors import ConfigError
from ..netmodel import NetworkSpec, total_flops

BISECT_TOL = 0.005
BISECT_STEPS = 80
GRADED_BASE_LO = 0.5


@dataclass(frozen=True)
class PolicyPlan:
    """A named ratio assignment with its measured cost and error."""

    name: str
    ratios: tuple[float, ...]
    flops: float
    flops_fraction: float
    error: float
    reward: float


def continuous_fraction(network: NetworkSpec, ratios: Sequence[float],
                        accounting: str) -> float:
    """FLOPs fraction kept under real-valued channel widths (no rounding)."""
    ts = network.prunable_ts()
    if len(ratios) != len(ts):
        raise ValueError(f"expected {len(ts)} ratios, got {len(ratios)}")
    by_t = dict(zip(ts, ratios))
    per_layer = network.layer_flops()
    kept = 0.0
    for layer, f in zip(network.layers, per_layer):
        a_out = by_t.get(layer.t, 1.0)
        a_in = by_t.get(layer.prev, 1.0) if accounting == "chained" else 1.0
        kept += f * a_out * a_in
    return kept / float(sum(per_layer))


def evaluate_plan(name: str, evaluator, ratios: Sequence[float],
                  reward: str = "err") -> PolicyPlan:
    """Score one ratio assignment through the evaluator's own accounting."""
    error = float(evaluator.evaluate(list(ratios)))
    flops = float(evaluator.flops(list(ratios)))
    total = float(total_flops(evaluator.network))
    return PolicyPlan(name, tuple(float(a) for a in ratios), flops,
                      flops / total, error, compute_reward(reward, error, flops))


def _bisect_cost(cost, lo: float, hi: float, target: float) -> float:
    """Largest x in [lo, hi] with cost(x) <= target; cost is nondecreasing."""
    c_lo = cost(lo)
    if c_lo > target * (1.0 + BISECT_TOL):
        raise ConfigError(
            f"target fraction {target} unreachable: minimum plan costs {c_lo:.4f}")
    if cost(hi) <= target:
        return hi
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if cost(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def uniform_policy(evaluator, alpha: float, a_floor: float = 0.05,
                   reward: str = "err") -> PolicyPlan:
    """One shared ratio chosen so the continuous cost meets alpha.

    Linear accounting admits a closed form; chained accounting bisects the
    shared ratio, landing within half a percent of the target.
    """
    network = evaluator.network
    ts = network.prunable_ts()
    if not ts:
        raise ConfigError("network has no prunable layers")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha {alpha} outside (0, 1]")

    if evaluator.accounting == "linear":
        per_layer = network.layer_flops()
        f_total = float(sum(per_layer))
        f_prun = float(sum(per_layer[t - 1] for t in ts))
        a = (alpha * f_total - (f_total - f_prun)) / f_prun
        if a > 1.0:
            a = 1.0
        if a < a_floor * (1.0 - 1e-12):
            raise ConfigError(
                f"alpha {alpha} needs uniform ratio {a:.4f} below the floor {a_floor}")
        a = max(a, a_floor)
    else:
        def cost(x):
            return continuous_fraction(network, [x] * len(ts), evaluator.accounting)
        a = _bisect_cost(cost, a_floor, 1.0, alpha)
    return evaluate_plan("uniform", evaluator, [a] * len(ts), reward)


def graded_policy(evaluator, alpha: float, mode: str, a_floor: float = 0.05,
                  reward: str = "err") -> PolicyPlan:
    """Depth-graded ratios: a linear ramp over layer position, scaled to alpha.

    shallow_aggressive ramps from small ratios at the first prunable layer up
    to larger ones at the last; deep_aggressive is the same ramp reversed.
    The overall scale is bisected so the continuous cost meets alpha.
    """
    if mode not in ("shallow_aggressive", "deep_aggressive"):
        raise ConfigError(f"unknown graded mode {mode!r}")
    network = evaluator.network
    ts = network.prunable_ts()
    if len(ts) < 2:
        raise ConfigError("graded policy needs at least two prunable layers")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha {alpha} outside (0, 1]")

    n = len(ts)
    base = [GRADED_BASE_LO + (1.0 - GRADED_BASE_LO) * i / (n - 1) for i in range(n)]
    if mode == "deep_aggressive":
        base = base[::-1]

    def ratios_at(theta):
        return [min(1.0, max(a_floor, theta * b)) for b in base]

    def cost(theta):
        return continuous_fraction(network, ratios_at(theta), evaluator.accounting)

    theta = _bisect_cost(cost, 0.0, 1.0 / GRADED_BASE_LO, alpha)
    return evaluate_plan(mode, evaluator, ratios_at(theta), reward)
