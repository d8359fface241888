"""Outer search loop: episodes, best tracking, logging, checkpoint, resume."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..agent import (DdpgAgent, NoiseSchedule, ReplayBuffer, Transition,
                     agent_state_tensors, restore_agent_state, sigma_for_episode)
from ..errors import ConfigError
from ..netmodel import STATE_DIM, total_flops
from ..nncore import load_checkpoint, save_checkpoint
from .budget import check_budget_feasible
from .episode import EpisodeResult, run_episode

LOG_NAME = "episodes.log"
SUMMARY_NAME = "summary.csv"
BEST_NAME = "best.json"
CKPT_STEM = "ckpt"


@dataclass(frozen=True)
class SearchConfig:
    """Everything one search run depends on."""

    evaluator: object
    episodes: int = 400
    schedule: NoiseSchedule = field(default_factory=NoiseSchedule)
    reward: str = "err"
    constraint: str = "none"
    alpha: float | None = None
    a_floor: float = 0.05
    batch_size: int = 64
    buffer_capacity: int = 2000
    tau: float = 0.01
    gamma: float = 1.0
    baseline_decay: float = 0.95
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    hidden: tuple[int, ...] = (300, 300)
    seed: int = 0
    out_dir: str | None = None
    finetune: bool = False
    finetune_fraction: float = 0.1
    checkpoint_every: int = 50
    protocol: str | None = None


@dataclass
class SearchOutcome:
    """What a search call produced."""

    best: EpisodeResult | None
    episodes_run: int
    completed: bool
    out_dir: str | None = None
    finetuned_error: float | None = None


def validate_config(config: SearchConfig):
    """Reject inconsistent search configurations up front."""
    if config.reward not in ("err", "flops"):
        raise ConfigError(f"unknown reward kind {config.reward!r}")
    if config.constraint not in ("none", "flops_budget"):
        raise ConfigError(f"unknown constraint kind {config.constraint!r}")
    if (config.constraint == "flops_budget") != (config.alpha is not None):
        raise ConfigError("alpha is required exactly when constraint is flops_budget")
    if config.alpha is not None and not 0.0 < config.alpha <= 1.0:
        raise ConfigError(f"alpha {config.alpha} outside (0, 1]")
    if config.episodes < 1:
        raise ConfigError("episodes must be positive")
    if config.episodes < config.schedule.warmup_episodes:
        raise ConfigError("episodes must cover the warmup")
    if config.schedule.total_episodes < config.episodes:
        raise ConfigError("noise schedule is shorter than the episode count")
    if config.batch_size > config.buffer_capacity:
        raise ConfigError("batch_size cannot exceed buffer_capacity")
    if not 0.0 < config.a_floor < 1.0:
        raise ConfigError(f"a_floor {config.a_floor} outside (0, 1)")


def build_agent(config: SearchConfig) -> DdpgAgent:
    return DdpgAgent(config.seed, hidden=tuple(config.hidden),
                     actor_lr=config.actor_lr, critic_lr=config.critic_lr,
                     tau=config.tau, gamma=config.gamma,
                     baseline_decay=config.baseline_decay, a_floor=config.a_floor)


def format_log_line(result: EpisodeResult, sigma: float, baseline: float | None,
                    best: EpisodeResult | None, protocol: str | None = None) -> str:
    """One structured line per episode; field order is fixed."""
    def opt(x):
        return None if x is None or (isinstance(x, float) and not np.isfinite(x)) else x

    record = {
        "episode": result.episode,
        "sigma": sigma,
        "actions": list(result.requested),
        "clamped": list(result.clamped),
        "flops": opt(result.flops),
        "flops_fraction": opt(result.flops_fraction),
        "error": opt(result.error),
        "reward": opt(result.reward),
        "baseline": opt(baseline),
        "best_so_far": opt(best.reward if best is not None else None),
        "budget_tight": result.budget_tight,
        "failed": result.failed,
        "protocol": protocol,
    }
    return json.dumps(record)


def _checkpoint_tensors(agent, buffer, next_episode, best) -> dict:
    tensors = {f"agent.{k}": v for k, v in agent_state_tensors(agent).items()}
    items = buffer.items()
    n = len(items)
    tensors["buffer.s"] = (np.stack([tr.s for tr in items]) if n
                           else np.zeros((0, STATE_DIM)))
    tensors["buffer.a"] = np.array([tr.a for tr in items])
    tensors["buffer.r"] = np.array([tr.r for tr in items])
    tensors["buffer.s2"] = (np.stack([tr.s_next for tr in items]) if n
                            else np.zeros((0, STATE_DIM)))
    tensors["buffer.terminal"] = np.array([float(tr.terminal) for tr in items])
    tensors["progress"] = np.array([float(next_episode)])
    if best is not None:
        tensors["best.requested"] = np.array(best.requested)
        tensors["best.clamped"] = np.array(best.clamped)
        tensors["best.scalars"] = np.array([
            float(best.episode), best.flops, best.flops_fraction, best.error,
            best.reward, best.duration, float(best.budget_tight)])
    return tensors


def _restore_from_tensors(tensors, agent, buffer):
    restore_agent_state(agent, {k[len("agent."):]: v for k, v in tensors.items()
                                if k.startswith("agent.")})
    n = tensors["buffer.a"].shape[0]
    for i in range(n):
        buffer.push(Transition(tensors["buffer.s"][i].copy(),
                               float(tensors["buffer.a"][i]),
                               float(tensors["buffer.r"][i]),
                               tensors["buffer.s2"][i].copy(),
                               bool(tensors["buffer.terminal"][i])))
    best = None
    if "best.scalars" in tensors:
        sc = tensors["best.scalars"]
        best = EpisodeResult(int(sc[0]), tuple(tensors["best.requested"]),
                             tuple(tensors["best.clamped"]), float(sc[1]),
                             float(sc[2]), float(sc[3]), float(sc[4]),
                             float(sc[5]), bool(sc[6]))
    return int(tensors["progress"][0]), best


def _truncate_log(path: str, keep_lines: int):
    if not os.path.exists(path):
        return
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(lines[:keep_lines])


def _write_summary(out_dir: str, rows: list[dict]):
    path = os.path.join(out_dir, SUMMARY_NAME)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("episode,reward,error,flops_fraction,best_reward\n")
        for row in rows:
            fh.write("{episode},{reward},{error},{flops_fraction},{best_reward}\n"
                     .format(**row))


def _maybe_finetune(config: SearchConfig, best: EpisodeResult | None):
    evaluator = config.evaluator
    if not config.finetune or best is None:
        return None
    if not (hasattr(evaluator, "dataset") and hasattr(evaluator, "net")):
        return None
    from ..evaluators import fine_tune, prune_network
    pruned = prune_network(evaluator.net, list(best.clamped))
    _, err = fine_tune(pruned, evaluator.dataset, fraction=config.finetune_fraction,
                       seed=config.seed)
    return float(err)


def search(config: SearchConfig, stop_after: int | None = None) -> SearchOutcome:
    """Run (or resume) the episode loop; returns the best episode found."""
    validate_config(config)
    evaluator = config.evaluator
    network = evaluator.network
    if config.constraint == "flops_budget":
        check_budget_feasible(network, config.alpha, config.a_floor,
                              evaluator.accounting)

    agent = build_agent(config)
    buffer = ReplayBuffer(config.buffer_capacity)
    start, best = 0, None

    out_dir = config.out_dir
    log_path = ckpt_stem = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        log_path = os.path.join(out_dir, LOG_NAME)
        ckpt_stem = os.path.join(out_dir, CKPT_STEM)
        if os.path.exists(ckpt_stem + ".manifest"):
            start, best = _restore_from_tensors(load_checkpoint(ckpt_stem), agent, buffer)
            _truncate_log(log_path, start)
        else:
            _truncate_log(log_path, 0)

    end = config.episodes if stop_after is None else min(config.episodes,
                                                         start + stop_after)
    log_fh = open(log_path, "a", encoding="utf-8") if log_path else None
    try:
        for episode in range(start, end):
            sigma = sigma_for_episode(config.schedule, episode)
            result = run_episode(agent, buffer, network, evaluator, config,
                                 episode, sigma)
            if not result.failed and (best is None or result.reward > best.reward):
                best = result
            if log_fh:
                log_fh.write(format_log_line(
                    result, sigma, agent.baseline if agent.baseline_set else None,
                    best, config.protocol) + "\n")
                log_fh.flush()
            if ckpt_stem and (episode + 1) % config.checkpoint_every == 0:
                save_checkpoint(ckpt_stem, _checkpoint_tensors(agent, buffer,
                                                               episode + 1, best))
    finally:
        if log_fh:
            log_fh.close()

    completed = end >= config.episodes
    if ckpt_stem:
        save_checkpoint(ckpt_stem, _checkpoint_tensors(agent, buffer, end, best))

    finetuned_error = None
    if completed:
        finetuned_error = _maybe_finetune(config, best)
        if out_dir:
            rows = _summary_rows(log_path)
            _write_summary(out_dir, rows)
            _write_best(out_dir, best, finetuned_error, total_flops(network))
    return SearchOutcome(best, end, completed, out_dir, finetuned_error)


def _summary_rows(log_path: str | None) -> list[dict]:
    rows = []
    if not log_path or not os.path.exists(log_path):
        return rows
    with open(log_path, "r", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            rows.append({
                "episode": rec["episode"],
                "reward": "" if rec["reward"] is None else repr(rec["reward"]),
                "error": "" if rec["error"] is None else repr(rec["error"]),
                "flops_fraction": ("" if rec["flops_fraction"] is None
                                   else repr(rec["flops_fraction"])),
                "best_reward": ("" if rec["best_so_far"] is None
                                else repr(rec["best_so_far"])),
            })
    return rows


def _write_best(out_dir: str, best: EpisodeResult | None,
                finetuned_error: float | None, f_total: int):
    record = None
    if best is not None:
        record = {
            "episode": best.episode,
            "ratios": list(best.clamped),
            "requested": list(best.requested),
            "flops": best.flops,
            "flops_fraction": best.flops_fraction,
            "error": best.error,
            "reward": best.reward,
            "total_flops": f_total,
            "finetuned_error": finetuned_error,
        }
    with open(os.path.join(out_dir, BEST_NAME), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
