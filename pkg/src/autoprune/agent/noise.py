"""Exploration noise: truncated-normal sampling and the two-phase schedule."""

from dataclasses import dataclass

import numpy as np


def truncated_normal(rng: np.random.Generator, mu: float, sigma: float,
                     lo: float = 0.0, hi: float = 1.0, max_rounds: int = 100,
                     size: int | None = None):
    """Draws from TN(mu, sigma^2, lo, hi) by rejection from the parent
    normal, vectorized over still-pending entries; after max_rounds misses
    the last draw is clamped (only reachable when the window's mass is
    vanishing).  Returns a float when size is None, else an array."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    scalar = size is None
    n = 1 if scalar else int(size)
    if sigma == 0:
        out = np.full(n, min(max(mu, lo), hi))
        return float(out[0]) if scalar else out
    out = np.empty(n)
    pending = np.arange(n)
    for _ in range(max_rounds):
        draws = rng.normal(mu, sigma, size=pending.size)
        ok = (draws >= lo) & (draws <= hi)
        out[pending[ok]] = draws[ok]
        if ok.all():
            pending = pending[:0]
            break
        pending = pending[~ok]
        stragglers = draws[~ok]
    if pending.size:
        out[pending] = np.clip(stragglers, lo, hi)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class NoiseSchedule:
    """Constant-sigma warmup, then exponential decay to final_sigma, hit
    exactly at the last episode."""

    warmup_episodes: int = 100
    warmup_sigma: float = 0.5
    decay_episodes: int = 300
    final_sigma: float = 0.01

    def __post_init__(self):
        if self.warmup_episodes < 0 or self.decay_episodes < 1:
            raise ValueError("need warmup_episodes >= 0 and decay_episodes >= 1")
        if self.warmup_sigma <= 0 or self.final_sigma <= 0:
            raise ValueError("sigmas must be positive")

    @property
    def total_episodes(self) -> int:
        return self.warmup_episodes + self.decay_episodes


def sigma_for_episode(schedule: NoiseSchedule, e: int) -> float:
    if not 0 <= e < schedule.total_episodes:
        raise IndexError(f"episode {e} outside 0..{schedule.total_episodes - 1}")
    if e < schedule.warmup_episodes:
        return schedule.warmup_sigma
    if schedule.decay_episodes == 1:
        return schedule.final_sigma
    # exponent reaches 1 at the last episode, so the endpoint is exact
    frac = (e - schedule.warmup_episodes) / (schedule.decay_episodes - 1)
    return schedule.warmup_sigma * (schedule.final_sigma / schedule.warmup_sigma) ** frac
