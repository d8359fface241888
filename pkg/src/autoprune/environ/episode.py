"""One episode: walk the layers, act, clamp, evaluate, share the reward."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..agent import Transition, explore, remember, train_step, update_baseline
from ..netmodel import STATE_DIM, normalize_states, raw_state
from .budget import BudgetState, clamp_action, rest_fixed_flops, walk_bookkeeping
from .rewards import compute_reward


@dataclass(frozen=True)
class EpisodeResult:
    """Outcome of one layer walk."""

    episode: int
    requested: tuple[float, ...]
    clamped: tuple[float, ...]
    flops: float
    flops_fraction: float
    error: float
    reward: float
    duration: float
    budget_tight: bool = False
    failed: bool = False


def _walk_states(network, evaluator, config, agent, sigma):
    """Walk the prunable layers once; returns (states, requested, clamped, tight)."""
    ts = network.prunable_ts()
    orig_f = network.layer_flops()
    f_total = float(sum(orig_f))

    states, requested, committed = [], [], []
    tight = False
    a_prev = 1.0
    for i, t in enumerate(ts):
        current, f_done, r_in = walk_bookkeeping(network, committed, i, t,
                                                 evaluator.accounting)
        before = float(sum(orig_f[:t - 1]))
        rest = float(sum(orig_f[t:]))
        raw = raw_state(current, t, before - f_done, rest, a_prev)
        s = normalize_states(network, raw)
        states.append(s)

        a_req = explore(agent, s, sigma)
        if config.constraint == "flops_budget":
            budget = BudgetState(f_total, config.alpha * f_total, f_done, rest,
                                 rest_fixed_flops(network, t))
            a, was_tight = clamp_action(a_req, orig_f[t - 1], budget, r_in, config.a_floor)
            tight = tight or was_tight
        else:
            a = a_req
        requested.append(float(a_req))
        committed.append(float(a))
        a_prev = float(a)
    return states, requested, committed, tight


def run_episode(agent, buffer, network, evaluator, config, episode: int,
                sigma: float) -> EpisodeResult:
    """Run one episode and feed its transitions to the learner."""
    t0 = time.perf_counter()
    states, requested, committed, tight = _walk_states(
        network, evaluator, config, agent, sigma)
    f_total = float(sum(network.layer_flops()))

    try:
        error = float(evaluator.evaluate(committed))
        flops = float(evaluator.flops(committed))
        reward = compute_reward(config.reward, error, flops)
    except Exception:
        return EpisodeResult(episode, tuple(requested), tuple(committed),
                             float("nan"), float("nan"), float("nan"), float("nan"),
                             time.perf_counter() - t0, tight, failed=True)

    transitions = []
    last = len(states) - 1
    for i, (s, a) in enumerate(zip(states, committed)):
        s_next = np.zeros(STATE_DIM) if i == last else states[i + 1]
        transitions.append(Transition(s, a, 0.0, s_next, i == last))
    remember(buffer, transitions, reward)
    update_baseline(agent, reward)
    if len(buffer) >= config.batch_size:
        for _ in transitions:
            train_step(agent, buffer, config.batch_size)

    return EpisodeResult(episode, tuple(requested), tuple(committed), flops,
                         flops / f_total, error, reward,
                         time.perf_counter() - t0, tight)
