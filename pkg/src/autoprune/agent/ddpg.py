"""DDPG learner: deterministic actor walking layers, action-value critic,
target copies, and baseline-corrected one-step targets."""

import copy

import numpy as np

from ..errors import TrainingError
from ..nncore import (
    Adam,
    Mlp,
    digits_to_u128,
    mlp_backward,
    mlp_forward,
    optimizer_step,
    u128_to_digits,
)
from ..netmodel import STATE_DIM
from .noise import truncated_normal
from .replay import ReplayBuffer


class DdpgAgent:
    """Actor 11 -> hidden -> 1 (sigmoid head), critic 12 -> hidden -> 1.

    The critic learning rate is an order above the actor's, the usual
    split when a single published rate covers only the actor.
    """

    def __init__(self, seed: int, hidden=(300, 300), actor_lr: float = 1e-4,
                 critic_lr: float = 1e-3, tau: float = 0.01, gamma: float = 1.0,
                 baseline_decay: float = 0.95, a_floor: float = 0.05):
        if not 0.0 <= a_floor < 1.0:
            raise ValueError(f"a_floor must be in [0,1), got {a_floor}")
        self.rng = np.random.Generator(np.random.PCG64(seed))
        hidden = list(hidden)
        acts = ["relu"] * len(hidden)
        self.actor = Mlp([STATE_DIM] + hidden + [1], acts + ["sigmoid"], self.rng, out_scale=0.1)
        self.critic = Mlp([STATE_DIM + 1] + hidden + [1], acts + ["identity"], self.rng)
        self.actor_target = copy.deepcopy(self.actor)
        self.critic_target = copy.deepcopy(self.critic)
        self.actor_opt = Adam(actor_lr)
        self.critic_opt = Adam(critic_lr)
        self.tau = tau
        self.gamma = gamma
        self.baseline_decay = baseline_decay
        self.a_floor = a_floor
        self.baseline = 0.0
        self.baseline_set = False

    # -- acting

    def _mu(self, s) -> float:
        return float(mlp_forward(self.actor, np.asarray(s, dtype=np.float64))[0])

    def clamp(self, a: float) -> float:
        return min(max(a, self.a_floor), 1.0)


def act(agent: DdpgAgent, s) -> float:
    """Deterministic action, clamped into [a_floor, 1]."""
    return agent.clamp(agent._mu(s))


def explore(agent: DdpgAgent, s, sigma: float) -> float:
    """Truncated-normal draw around the actor's output, clamped like act."""
    if sigma == 0:
        return act(agent, s)
    return agent.clamp(truncated_normal(agent.rng, agent._mu(s), sigma))


def update_baseline(agent: DdpgAgent, reward: float):
    """Exponential moving average, seeded with the first episode's reward."""
    if not agent.baseline_set:
        agent.baseline = float(reward)
        agent.baseline_set = True
    else:
        d = agent.baseline_decay
        agent.baseline = d * agent.baseline + (1.0 - d) * float(reward)


def _soft_update(target: Mlp, online: Mlp, tau: float):
    tp, op = target.params(), online.params()
    for k in tp:
        tp[k] *= 1.0 - tau
        tp[k] += tau * op[k]


def one_step_targets(agent: DdpgAgent, r, s2, live) -> np.ndarray:
    """Critic targets: episode reward re-centered by the running baseline
    plus the bootstrap from the target copies; terminal rows (live = 0) drop
    the bootstrap term."""
    a2 = mlp_forward(agent.actor_target, s2)
    q2 = mlp_forward(agent.critic_target, np.hstack([s2, a2]))
    return (r - agent.baseline) + agent.gamma * q2 * live


def train_step(agent: DdpgAgent, buffer: ReplayBuffer, batch_size: int) -> tuple[float, float]:
    """One critic + actor update on a sampled minibatch; returns (critic
    loss, mean critic value of the actor's actions)."""
    if len(buffer) < batch_size:
        raise TrainingError(f"buffer holds {len(buffer)} < batch {batch_size}")
    batch = buffer.sample(agent.rng, batch_size)
    s = np.stack([tr.s for tr in batch])
    a = np.array([[tr.a] for tr in batch])
    r = np.array([[tr.r] for tr in batch])
    s2 = np.stack([tr.s_next for tr in batch])
    live = np.array([[0.0 if tr.terminal else 1.0] for tr in batch])

    y = one_step_targets(agent, r, s2, live)

    x = np.hstack([s, a])
    q = mlp_forward(agent.critic, x)
    diff = q - y
    critic_loss = float(np.mean(diff * diff))
    if not np.isfinite(critic_loss):
        raise TrainingError(f"critic loss diverged: {critic_loss}")
    cgrads, _ = mlp_backward(agent.critic, x, (2.0 / diff.size) * diff)
    optimizer_step(agent.critic_opt, agent.critic.params(), cgrads)

    # ascend Q(s, mu(s)): route -dQ/da through the actor
    mu = mlp_forward(agent.actor, s)
    xa = np.hstack([s, mu])
    qa = mlp_forward(agent.critic, xa)
    actor_value = float(np.mean(qa))
    if not np.isfinite(actor_value):
        raise TrainingError(f"actor objective diverged: {actor_value}")
    _, gin = mlp_backward(agent.critic, xa, np.full((batch_size, 1), -1.0 / batch_size))
    agrads, _ = mlp_backward(agent.actor, s, gin[:, STATE_DIM:])
    optimizer_step(agent.actor_opt, agent.actor.params(), agrads)

    _soft_update(agent.actor_target, agent.actor, agent.tau)
    _soft_update(agent.critic_target, agent.critic, agent.tau)
    return critic_loss, actor_value


# -- checkpointing

def _rng_tensors(rng: np.random.Generator) -> dict[str, np.ndarray]:
    st = rng.bit_generator.state
    return {
        "rng.state": u128_to_digits(st["state"]["state"]),
        "rng.inc": u128_to_digits(st["state"]["inc"]),
        "rng.has_uint32": np.array(float(st["has_uint32"])),
        "rng.uinteger": np.array(float(st["uinteger"])),
    }


def _restore_rng(rng: np.random.Generator, tensors: dict[str, np.ndarray]):
    rng.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {
            "state": digits_to_u128(tensors["rng.state"]),
            "inc": digits_to_u128(tensors["rng.inc"]),
        },
        "has_uint32": int(tensors["rng.has_uint32"]),
        "uinteger": int(tensors["rng.uinteger"]),
    }


def agent_state_tensors(agent: DdpgAgent) -> dict[str, np.ndarray]:
    """Everything needed to resume training mid-run, flat named tensors."""
    out: dict[str, np.ndarray] = {}
    for prefix, net in (("actor", agent.actor), ("critic", agent.critic),
                        ("actor_target", agent.actor_target), ("critic_target", agent.critic_target)):
        for k, v in net.params().items():
            out[f"{prefix}.{k}"] = v
    for prefix, opt in (("actor_opt", agent.actor_opt), ("critic_opt", agent.critic_opt)):
        for k, v in opt.state().items():
            out[f"{prefix}.{k}"] = v
    out["baseline"] = np.array(agent.baseline)
    out["baseline_set"] = np.array(1.0 if agent.baseline_set else 0.0)
    out.update(_rng_tensors(agent.rng))
    return out


def restore_agent_state(agent: DdpgAgent, tensors: dict[str, np.ndarray]):
    for prefix, net in (("actor", agent.actor), ("critic", agent.critic),
                        ("actor_target", agent.actor_target), ("critic_target", agent.critic_target)):
        params = net.params()
        for k, p in params.items():
            p[...] = tensors[f"{prefix}.{k}"]
    for prefix, opt in (("actor_opt", agent.actor_opt), ("critic_opt", agent.critic_opt)):
        state = {k.removeprefix(prefix + "."): v for k, v in tensors.items()
                 if k.startswith(prefix + ".")}
        if state:
            opt.restore(state)
    agent.baseline = float(tensors["baseline"])
    agent.baseline_set = bool(tensors["baseline_set"])
    _restore_rng(agent.rng, tensors)
