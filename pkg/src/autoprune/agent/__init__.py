"""DDPG layer-walk learner: actor/critic, replay, exploration noise."""

from .ddpg import (
    DdpgAgent,
    act,
    agent_state_tensors,
    explore,
    one_step_targets,
    restore_agent_state,
    train_step,
    update_baseline,
)
from .noise import NoiseSchedule, sigma_for_episode, truncated_normal
from .replay import ReplayBuffer, Transition, remember

__all__ = [
    "DdpgAgent", "NoiseSchedule", "ReplayBuffer", "Transition", "act",
    "agent_state_tensors", "explore", "one_step_targets", "remember",
    "restore_agent_state", "sigma_for_episode", "train_step",
    "truncated_normal", "update_baseline",
]
