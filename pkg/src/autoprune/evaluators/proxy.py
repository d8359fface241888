"""Analytic per-layer-sensitivity proxy with a closed-form error surface."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..netmodel import NetworkSpec
from .base import Evaluator

SENSITIVITY_RANGE = (0.001, 0.05)


@dataclass(frozen=True)
class ProxyModel:
    """Separable error model: error = clamp(e0 + sum s_t * (1 - a_t)^p, 0, 1)."""

    sensitivities: tuple[float, ...]
    base_error: float
    exponent: float
    layer_flops: tuple[int, ...]

    def __post_init__(self):
        if len(self.sensitivities) != len(self.layer_flops):
            raise ConfigError("sensitivities and layer_flops must have equal length")
        if not self.sensitivities:
            raise ConfigError("proxy model needs at least one layer")
        if any(s <= 0.0 for s in self.sensitivities):
            raise ConfigError("sensitivities must be positive")
        if not 0.0 <= self.base_error <= 1.0:
            raise ConfigError(f"base_error {self.base_error} outside [0, 1]")
        if self.exponent <= 0.0:
            raise ConfigError("exponent must be positive")


def make_proxy(network: NetworkSpec, seed: int, base_error: float = 0.05,
               exponent: float = 2.0) -> ProxyModel:
    """Draw one sensitivity per prunable layer of a network, seeded."""
    rng = np.random.Generator(np.random.PCG64(seed))
    ts = network.prunable_ts()
    lo, hi = SENSITIVITY_RANGE
    sens = rng.uniform(lo, hi, size=len(ts))
    per_layer = network.layer_flops()
    flops = tuple(per_layer[t - 1] for t in ts)
    return ProxyModel(tuple(float(s) for s in sens), float(base_error), float(exponent), flops)


def _check_ratios(model: ProxyModel, ratios) -> list[float]:
    ratios = [float(a) for a in ratios]
    if len(ratios) != len(model.sensitivities):
        raise ValueError(f"expected {len(model.sensitivities)} ratios, got {len(ratios)}")
    for a in ratios:
        if not 0.0 < a <= 1.0:
            raise ValueError(f"ratio {a} outside (0, 1]")
    return ratios


def proxy_evaluate(model: ProxyModel, ratios) -> float:
    """Closed-form error for a ratio vector; deterministic."""
    ratios = _check_ratios(model, ratios)
    penalty = sum(s * (1.0 - a) ** model.exponent
                  for s, a in zip(model.sensitivities, ratios))
    return min(1.0, max(0.0, model.base_error + penalty))


def proxy_flops(model: ProxyModel, ratios) -> float:
    """Linear output-only accounting: each modeled layer costs f_t * a_t."""
    ratios = _check_ratios(model, ratios)
    return float(sum(f * a for f, a in zip(model.layer_flops, ratios)))


class ProxyEvaluator(Evaluator):
    """Evaluator facade over a ProxyModel tied to a network description."""

    accounting = "linear"

    def __init__(self, network: NetworkSpec, model: ProxyModel):
        ts = network.prunable_ts()
        if len(model.sensitivities) != len(ts):
            raise ConfigError(
                f"model covers {len(model.sensitivities)} layers, network has {len(ts)} prunable")
        self.network = network
        self.model = model
        per_layer = network.layer_flops()
        self._fixed = sum(f for f, layer in zip(per_layer, network.layers)
                          if not layer.prunable)

    @property
    def layer_count(self) -> int:
        return len(self.model.sensitivities)

    @property
    def fixed_flops(self) -> float:
        return float(self._fixed)

    def base_error(self) -> float:
        return self.model.base_error

    def evaluate(self, ratios) -> float:
        return proxy_evaluate(self.model, ratios)

    def flops(self, ratios) -> float:
        return proxy_flops(self.model, ratios) + self._fixed
