"""Shared fixtures for unit and acceptance tests."""

import numpy as np

from autoprune.agent import (
    DdpgAgent,
    ReplayBuffer,
    Transition,
    act,
    remember,
    train_step,
    update_baseline,
)

BANDIT_STATE = np.full(11, 0.5)
BANDIT_OPT = 0.7


def bandit_reward(a: float) -> float:
    return -((a - BANDIT_OPT) ** 2)


def run_bandit(seed: int, steps: int = 2000, hidden=(64, 64), batch: int = 64) -> float:
    """1-state 1-step task with closed-form optimum a* = 0.7: fill a buffer
    with uniform actions, train, return the greedy action."""
    agent = DdpgAgent(seed, hidden=hidden)
    buffer = ReplayBuffer(2000)
    zeros = np.zeros(11)
    for _ in range(buffer.capacity):
        a = float(agent.rng.uniform(agent.a_floor, 1.0))
        r = bandit_reward(a)
        remember(buffer, [Transition(BANDIT_STATE, a, 0.0, zeros, True)], r)
        update_baseline(agent, r)
    for _ in range(steps):
        train_step(agent, buffer, batch)
    return act(agent, BANDIT_STATE)
