"""Experience replay: per-layer transitions sharing one episode reward."""

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: float
    r: float
    s_next: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Bounded FIFO; minibatches sample uniformly without replacement."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._items: list[Transition] = []

    def __len__(self) -> int:
        return len(self._items)

    def push(self, tr: Transition):
        self._items.append(tr)
        if len(self._items) > self.capacity:
            del self._items[0]

    def sample(self, rng: np.random.Generator, n: int) -> list[Transition]:
        idx = rng.choice(len(self._items), size=n, replace=False)
        return [self._items[i] for i in idx]

    def items(self) -> tuple[Transition, ...]:
        return tuple(self._items)


def remember(buffer: ReplayBuffer, transitions: list[Transition], reward: float):
    """Stamp one episode's reward onto its transitions and append them.

    The raw episode reward is stored; the baseline is subtracted at training
    time so a later baseline still corrects old experience.
    """
    for tr in transitions:
        buffer.push(replace(tr, r=float(reward)))
