"""FLOPs budget bookkeeping and the downward action clamp."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError
from ..netmodel import NetworkSpec, apply_ratios, total_flops


@dataclass(frozen=True)
class BudgetState:
    """FLOPs ledger at one step of the layer walk.

    f_done counts the committed (already compressed) layers before the current
    one; f_rest is the original cost of the layers after it, of which
    f_rest_fixed belongs to non-prunable layers that cannot shrink below their
    original output width.
    """

    f_total: float
    f_budget: float
    f_done: float
    f_rest: float
    f_rest_fixed: float = 0.0

    def __post_init__(self):
        for name in ("f_total", "f_budget", "f_done", "f_rest", "f_rest_fixed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.f_rest_fixed > self.f_rest:
            raise ConfigError("f_rest_fixed cannot exceed f_rest")


def clamp_action(a: float, f_t: float, budget: BudgetState, r_in: float,
                 a_floor: float) -> tuple[float, bool]:
    """Clamp a requested ratio so later layers can still finish within budget.

    Reserves a_floor times the prunable remainder plus the full cost of any
    non-prunable remainder; returns (clamped ratio, budget-tight flag).
    """
    reserve = a_floor * (budget.f_rest - budget.f_rest_fixed) + budget.f_rest_fixed
    m = budget.f_budget - budget.f_done - reserve
    if m <= 0.0:
        return a_floor, True
    cap = min(1.0, m / (f_t * r_in))
    # the reserve construction keeps cap >= a_floor in exact arithmetic; only
    # flag the budget as tight when the shortfall exceeds rounding noise
    if cap < a_floor * (1.0 - 1e-9):
        return a_floor, True
    return min(max(a, a_floor), max(cap, a_floor)), False


def rest_fixed_flops(network: NetworkSpec, t: int) -> float:
    """Original cost of the non-prunable layers after layer t."""
    out = 0.0
    for t2, f in enumerate(network.layer_flops(), start=1):
        if t2 > t and not network.layer(t2).prunable:
            out += f
    return out


def walk_bookkeeping(network: NetworkSpec, committed: list[float], i: int, t: int,
                     accounting: str):
    """Budget bookkeeping at prunable layer t given the ratios committed so far.

    Returns (current network, FLOPs already spent before layer t, input ratio).
    Under chained accounting the committed prefix is applied for real, so both
    the spend and the input width reflect upstream pruning; under linear
    accounting layers are costed independently.
    """
    ts = network.prunable_ts()
    orig_f = network.layer_flops()
    if accounting == "chained":
        current = apply_ratios(network, list(committed) + [1.0] * (len(ts) - i))
        cur_f = current.layer_flops()
        f_done = float(sum(cur_f[:t - 1]))
        r_in = current.layer(t).c / network.layer(t).c
    else:
        pos = {t2: j for j, t2 in enumerate(ts)}
        current = network
        f_done = 0.0
        for t2 in range(1, t):
            f2 = orig_f[t2 - 1]
            f_done += committed[pos[t2]] * f2 if network.layer(t2).prunable else f2
        r_in = 1.0
    return current, f_done, r_in


def clamp_plan(network: NetworkSpec, requested, alpha: float, a_floor: float,
               accounting: str) -> tuple[list[float], bool]:
    """Clamp a full vector of requested ratios with the same walk the agent runs.

    Visits prunable layers in order, recomputing the spend and input ratio after
    each commitment, and returns (clamped ratios, budget-tight flag).
    """
    ts = network.prunable_ts()
    if len(requested) != len(ts):
        raise ValueError(f"expected {len(ts)} ratios, got {len(requested)}")
    orig_f = network.layer_flops()
    f_total = float(sum(orig_f))
    committed: list[float] = []
    tight = False
    for i, t in enumerate(ts):
        _, f_done, r_in = walk_bookkeeping(network, committed, i, t, accounting)
        rest = float(sum(orig_f[t:]))
        budget = BudgetState(f_total, alpha * f_total, f_done, rest,
                             rest_fixed_flops(network, t))
        a, was_tight = clamp_action(requested[i], orig_f[t - 1], budget, r_in, a_floor)
        committed.append(float(a))
        tight = tight or was_tight
    return committed, tight


def floor_plan_flops(network: NetworkSpec, a_floor: float, accounting: str) -> float:
    """Total FLOPs when every prunable layer is pushed down to a_floor."""
    floors = [a_floor] * len(network.prunable_ts())
    if accounting == "chained":
        return float(total_flops(apply_ratios(network, floors)))
    per_layer = network.layer_flops()
    out = 0.0
    for f, layer in zip(per_layer, network.layers):
        out += a_floor * f if layer.prunable else f
    return out


def check_budget_feasible(network: NetworkSpec, alpha: float, a_floor: float,
                          accounting: str):
    """Raise ConfigError when even the all-floor plan exceeds alpha * F_total."""
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha {alpha} outside (0, 1]")
    if not 0.0 < a_floor <= 1.0:
        raise ConfigError(f"a_floor {a_floor} outside (0, 1]")
    budget = alpha * total_flops(network)
    lowest = floor_plan_flops(network, a_floor, accounting)
    if lowest > budget:
        raise ConfigError(
            f"budget {budget:.0f} FLOPs infeasible: all-floor plan needs {lowest:.0f}")


def rounding_slack(network: NetworkSpec) -> float:
    """Upper bound on the FLOPs excess from rounding channel counts.

    Each layer's surviving output and input widths can round up by at most one
    channel, so the excess over the continuous plan is below
    f_t * (1/n + 1/c + 1/(n*c)) summed over layers.
    """
    slack = 0.0
    for f, layer in zip(network.layer_flops(), network.layers):
        slack += f * (1.0 / layer.n + 1.0 / layer.c + 1.0 / (layer.n * layer.c))
    return slack
