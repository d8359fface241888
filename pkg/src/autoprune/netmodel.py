"""Declarative network model: layer geometry, FLOPs accounting, agent state
features, and channel-ratio application.

Networks are sequential chains of conv/dense layers described by a plain-text
``.net`` file, one record per line::

    # comment
    conv t=1 n=64 c=3 h=224 w=224 k=3 stride=1 pad=1 prev=0
    dense t=19 n=1000 c=4096 prev=18

``prev`` names the layer whose outputs feed this one (0 = network input); the
consumer's input channels ``c`` must equal the producer's output channels
``n``.  Dense records may omit h/w/k/stride/pad (all default to the dense
geometry).  ``prunable=0|1`` may be given per record; when omitted, every
layer is prunable except the last one, whose output width is fixed by the
task.  Pooling/activation stages carry no cost and are expressed through each
record's declared input size.

FLOPs are multiply-accumulate counts: ``n*c*k^2*h_out*w_out`` for conv,
``n*c`` for dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import GeometryError

STATE_DIM = 11


@dataclass(frozen=True)
class LayerSpec:
    """One conv or dense layer; geometry refers to the layer's input."""

    t: int
    kind: str  # "conv" | "dense"
    n: int
    c: int
    h: int = 1
    w: int = 1
    k: int = 1
    stride: int = 1
    pad: int = 0
    prev: int = 0
    prunable: bool = True

    def __post_init__(self):
        if self.kind not in ("conv", "dense"):
            raise GeometryError(f"layer {self.t}: unknown kind {self.kind!r}")
        if min(self.n, self.c, self.k, self.stride) < 1 or self.pad < 0:
            raise GeometryError(f"layer {self.t}: counts must be positive")
        if self.kind == "dense" and (self.h, self.w, self.k, self.stride, self.pad) != (1, 1, 1, 1, 0):
            raise GeometryError(f"layer {self.t}: dense layers use h=w=k=stride=1, pad=0")
        self.out_size()  # validates geometry

    def out_size(self) -> tuple[int, int]:
        ho = (self.h + 2 * self.pad - self.k) // self.stride + 1
        wo = (self.w + 2 * self.pad - self.k) // self.stride + 1
        if ho < 1 or wo < 1:
            raise GeometryError(f"layer {self.t}: output size {ho}x{wo} < 1")
        return ho, wo


def conv_flops(layer: LayerSpec) -> int:
    """Multiply-accumulates of one layer; exact integer arithmetic."""
    if layer.kind == "dense":
        return layer.n * layer.c
    ho, wo = layer.out_size()
    return layer.n * layer.c * layer.k * layer.k * ho * wo


@dataclass(frozen=True)
class NetworkSpec:
    """An ordered chain of layers with declared producer/consumer links."""

    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        by_t = {}
        for i, layer in enumerate(self.layers):
            if layer.t != i + 1:
                raise GeometryError(f"layer ids must be 1..T in order, got t={layer.t} at position {i}")
            by_t[layer.t] = layer
        for layer in self.layers:
            if layer.prev:
                prod = by_t.get(layer.prev)
                if prod is None or layer.prev >= layer.t:
                    raise GeometryError(f"layer {layer.t}: bad predecessor {layer.prev}")
                if layer.c != prod.n:
                    raise GeometryError(
                        f"layer {layer.t}: input channels {layer.c} != predecessor {prod.t} output {prod.n}"
                    )

    def __len__(self) -> int:
        return len(self.layers)

    def layer(self, t: int) -> LayerSpec:
        if not 1 <= t <= len(self.layers):
            raise IndexError(f"layer index {t} out of range 1..{len(self.layers)}")
        return self.layers[t - 1]

    def prunable_ts(self) -> tuple[int, ...]:
        return tuple(l.t for l in self.layers if l.prunable)

    def layer_flops(self) -> tuple[int, ...]:
        return tuple(conv_flops(l) for l in self.layers)


def total_flops(network: NetworkSpec) -> int:
    return sum(conv_flops(l) for l in network.layers)


def keep_channels(a: float, n: int) -> int:
    """Surviving output channels for ratio ``a``: round half up, never below 1."""
    if not 0.0 < a <= 1.0:
        raise ValueError(f"ratio {a} outside (0, 1]")
    return max(1, math.floor(a * n + 0.5))


def apply_ratios(network: NetworkSpec, ratios: Sequence[float] | Mapping[int, float]) -> NetworkSpec:
    """Compress the chain: prunable layer t keeps ``keep_channels(a_t, n)``
    outputs, and every declared consumer's input follows its producer.

    ``ratios`` is one value per prunable layer in network order, or a mapping
    from layer id to ratio.  The input network is left untouched.
    """
    if isinstance(ratios, Mapping):
        by_t = dict(ratios)
    else:
        ts = network.prunable_ts()
        if len(ratios) != len(ts):
            raise ValueError(f"expected {len(ts)} ratios, got {len(ratios)}")
        by_t = dict(zip(ts, ratios))
    unknown = set(by_t) - set(network.prunable_ts())
    if unknown:
        raise ValueError(f"ratios given for non-prunable layers {sorted(unknown)}")

    new_n: dict[int, int] = {}
    out = []
    for layer in network.layers:
        c = new_n[layer.prev] if layer.prev else layer.c
        n = keep_channels(by_t[layer.t], layer.n) if layer.t in by_t else layer.n
        new_n[layer.t] = n
        out.append(replace(layer, n=n, c=c))
    return NetworkSpec(tuple(out))


# ---------------------------------------------------------------------------
# state features

# An 11-vector with every component in [0, 1]; what the agent actually sees.
NormalizedState = np.ndarray


@dataclass(frozen=True)
class RawStateFeatures:
    """The 11 per-layer attributes handed to the agent, before scaling.

    The first eight describe the layer as built (static geometry and cost);
    ``reduced`` counts FLOPs removed by already-committed layers, ``rest``
    the cost of layers still ahead.  ``a_prev`` is the previous layer's
    chosen ratio, 1 for the first layer.
    """

    t: int
    n: int
    c: int
    h: int
    w: int
    stride: int
    k: int
    layer_flops: float
    reduced: float
    rest: float
    a_prev: float

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.t, self.n, self.c, self.h, self.w, self.stride, self.k,
             self.layer_flops, self.reduced, self.rest, self.a_prev],
            dtype=np.float64,
        )


def raw_state(network: NetworkSpec, t: int, reduced: float, rest: float, a_prev: float) -> RawStateFeatures:
    """State features of layer ``t`` given episode progress; pure function."""
    layer = network.layer(t)
    return RawStateFeatures(
        t=layer.t, n=layer.n, c=layer.c, h=layer.h, w=layer.w,
        stride=layer.stride, k=layer.k,
        layer_flops=float(conv_flops(layer)),
        reduced=float(reduced), rest=float(rest), a_prev=float(a_prev),
    )


class StateNormalizer:
    """Min-max scaling of state features into [0, 1].

    The first eight features scale against their min/max over the original
    network's layers (a constant feature maps to 0); ``reduced`` and ``rest``
    divide by the network's total FLOPs; ``a_prev`` is already a ratio and
    passes through.  Stats are computed once so episode loops can reuse them.
    """

    def __init__(self, network: NetworkSpec):
        rows = np.array(
            [[l.t, l.n, l.c, l.h, l.w, l.stride, l.k, conv_flops(l)] for l in network.layers],
            dtype=np.float64,
        )
        self.lo = rows.min(axis=0)
        self.hi = rows.max(axis=0)
        self.flops_total = float(total_flops(network))

    def __call__(self, raw: RawStateFeatures) -> NormalizedState:
        x = raw.to_array()
        out = np.empty(STATE_DIM)
        span = self.hi - self.lo
        for i in range(8):
            out[i] = 0.0 if span[i] == 0 else (x[i] - self.lo[i]) / span[i]
        out[8] = x[8] / self.flops_total if self.flops_total else 0.0
        out[9] = x[9] / self.flops_total if self.flops_total else 0.0
        out[10] = x[10]
        return np.clip(out, 0.0, 1.0)


def normalize_states(network: NetworkSpec, raw: RawStateFeatures) -> NormalizedState:
    """One-shot scaling; episode loops should hold a :class:`StateNormalizer`."""
    return StateNormalizer(network)(raw)


# ---------------------------------------------------------------------------
# .net file format

_INT_FIELDS = ("t", "n", "c", "h", "w", "k", "stride", "pad", "prev", "prunable")


def parse_network(text: str, name: str = "<string>") -> NetworkSpec:
    """Parse the ``.net`` record format documented in the module docstring."""
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        fields: dict[str, int] = {}
        for part in parts[1:]:
            if "=" not in part:
                raise GeometryError(f"{name}:{lineno}: expected key=value, got {part!r}")
            key, _, value = part.partition("=")
            if key not in _INT_FIELDS:
                raise GeometryError(f"{name}:{lineno}: unknown field {key!r}")
            try:
                fields[key] = int(value)
            except ValueError:
                raise GeometryError(f"{name}:{lineno}: bad integer {value!r} for {key}") from None
        records.append((lineno, kind, fields))
    if not records:
        return NetworkSpec(())

    layers = []
    last = len(records)
    for i, (lineno, kind, fields) in enumerate(records):
        prunable = bool(fields.pop("prunable", i != last - 1))
        try:
            layers.append(LayerSpec(kind=kind, prunable=prunable, **fields))
        except (GeometryError, TypeError) as exc:
            raise GeometryError(f"{name}:{lineno}: {exc}") from None
    return NetworkSpec(tuple(layers))


def format_network(network: NetworkSpec) -> str:
    lines = []
    for l in network.layers:
        fields = f"t={l.t} n={l.n} c={l.c}"
        if l.kind == "conv":
            fields += f" h={l.h} w={l.w} k={l.k} stride={l.stride} pad={l.pad}"
        fields += f" prev={l.prev} prunable={int(l.prunable)}"
        lines.append(f"{l.kind} {fields}")
    return "\n".join(lines) + "\n"


def load_network(path) -> NetworkSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_network(fh.read(), name=str(path))


def resolve_network_path(name: str) -> str:
    """Resolve a ``.net`` argument: an existing path wins, otherwise fall
    back to the files bundled with the package (vgg19, plain34, proxy5,
    tinycnn), with or without the .net suffix."""
    import os

    candidates = [name] if name.endswith(".net") else [name, name + ".net"]
    for cand in candidates:
        if os.path.exists(cand):
            return cand
        bundled = os.path.join(os.path.dirname(__file__), "data", os.path.basename(cand))
        if os.path.exists(bundled):
            return bundled
    raise FileNotFoundError(f"no such network file: {name} (and no bundled copy)")
