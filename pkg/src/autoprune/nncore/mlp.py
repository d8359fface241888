"""Small fully-connected networks with exact reverse-mode gradients."""

import math

import numpy as np

from ..errors import ShapeError
from .core import Tensor

ACTIVATIONS = ("relu", "sigmoid", "tanh", "identity")


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z, a):
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


class Mlp:
    """Affine+activation stack; weights[i] maps sizes[i] to sizes[i+1].

    Initialization is uniform in ±1/sqrt(fan_in); the final layer shrinks by
    ``out_scale`` so e.g. a sigmoid head can start near mid-range.
    """

    def __init__(self, sizes, activations, rng, out_scale=1.0):
        if len(sizes) < 2 or len(activations) != len(sizes) - 1:
            raise ShapeError(f"need one activation per layer, got {len(activations)} for {len(sizes)} sizes")
        for name in activations:
            if name not in ACTIVATIONS:
                raise ValueError(f"unknown activation {name!r}")
        self.sizes = list(sizes)
        self.activations = list(activations)
        self.weights = []
        self.biases = []
        last = len(sizes) - 2
        for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
            bound = (out_scale if i == last else 1.0) / math.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
            self.biases.append(rng.uniform(-bound, bound, fan_out))

    def params(self) -> dict[str, Tensor]:
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"l{i}.w"] = w
            out[f"l{i}.b"] = b
        return out


def _as_batch(x, want):
    x = np.asarray(x, dtype=np.float64)
    squeezed = x.ndim == 1
    if squeezed:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != want:
        raise ShapeError(f"input shape {x.shape} incompatible with layer size {want}")
    return x, squeezed


def mlp_forward(net: Mlp, x: Tensor) -> Tensor:
    x, squeezed = _as_batch(x, net.sizes[0])
    a = x
    for w, b, act in zip(net.weights, net.biases, net.activations):
        a = _act(act, a @ w.T + b)
    return a[0] if squeezed else a


def mlp_backward(net: Mlp, x: Tensor, output_grad: Tensor) -> tuple[dict[str, Tensor], Tensor]:
    """Gradients of sum(output * output_grad) in every parameter and in x.

    Activations are recomputed from ``x``, so no prior forward call is
    required.  Batched inputs accumulate parameter gradients over the batch.
    """
    x, squeezed = _as_batch(x, net.sizes[0])
    pre, post = [], [x]
    a = x
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = a @ w.T + b
        a = _act(act, z)
        pre.append(z)
        post.append(a)

    g = np.asarray(output_grad, dtype=np.float64)
    if squeezed:
        g = g[None, :]
    if g.shape != post[-1].shape:
        raise ShapeError(f"output_grad shape {g.shape} vs output {post[-1].shape}")

    grads = {}
    for i in reversed(range(len(net.weights))):
        delta = g * _act_grad(net.activations[i], pre[i], post[i + 1])
        grads[f"l{i}.w"] = delta.T @ post[i]
        grads[f"l{i}.b"] = delta.sum(axis=0)
        g = delta @ net.weights[i]
    return grads, (g[0] if squeezed else g)
