"""Gradient-descent optimizers over named parameter dicts (updated in place)."""

import numpy as np

from ..errors import TrainingError
from .core import Tensor


def _check_grad(name, g):
    if not np.all(np.isfinite(g)):
        raise TrainingError(f"non-finite gradient for {name}")


class Sgd:
    """p <- p - lr * g, with optional heavy-ball momentum."""

    kind = "sgd"

    def __init__(self, lr: float, momentum: float = 0.0):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.lr = lr
        self.momentum = momentum
        self.velocity: dict[str, Tensor] = {}

    def step(self, params: dict[str, Tensor], grads: dict[str, Tensor]):
        for name, p in params.items():
            g = grads[name]
            _check_grad(name, g)
            if self.momentum:
                v = self.velocity.setdefault(name, np.zeros_like(p))
                v *= self.momentum
                v += g
                g = v
            p -= self.lr * g

    def state(self) -> dict[str, Tensor]:
        return {f"velocity.{k}": v for k, v in self.velocity.items()}

    def restore(self, tensors: dict[str, Tensor]):
        self.velocity = {k.removeprefix("velocity."): np.array(v) for k, v in tensors.items()}


class Adam:
    """Bias-corrected Adam (beta1=0.9, beta2=0.999, eps=1e-8)."""

    kind = "adam"

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, Tensor] = {}
        self.v: dict[str, Tensor] = {}

    def step(self, params: dict[str, Tensor], grads: dict[str, Tensor]):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, p in params.items():
            g = grads[name]
            _check_grad(name, g)
            m = self.m.setdefault(name, np.zeros_like(p))
            v = self.v.setdefault(name, np.zeros_like(p))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {"t": np.array(float(self.t))}
        for k, m in self.m.items():
            out[f"m.{k}"] = m
        for k, v in self.v.items():
            out[f"v.{k}"] = v
        return out

    def restore(self, tensors: dict[str, Tensor]):
        self.t = int(tensors["t"])
        self.m = {k.removeprefix("m."): np.array(v) for k, v in tensors.items() if k.startswith("m.")}
        self.v = {k.removeprefix("v."): np.array(v) for k, v in tensors.items() if k.startswith("v.")}


def optimizer_step(opt, params: dict[str, Tensor], grads: dict[str, Tensor]) -> dict[str, Tensor]:
    opt.step(params, grads)
    return params
