"""Run directories: one search run persisted whole, plus offline reports."""

from __future__ import annotations

import datetime
import json
import os
from dataclasses import replace

from .. import __version__
from ..environ.search import BEST_NAME, SUMMARY_NAME, search
from ..errors import ConfigError
from ..evaluators import save_tinycnn
from .config import (FileConfig, make_evaluator, make_search_config,
                     parse_config, protocol_fingerprint)
from .policies import evaluate_plan, graded_policy, uniform_policy
from .randsearch import random_search
from .seeds import SEED_SCHEME, derive_seed

CONFIG_SNAPSHOT = "config.txt"
MANIFEST_NAME = "manifest.json"
NET_STEM = "net"


def _snapshot_config(out_dir: str, text: str):
    """Write the config snapshot, refusing to resume under a different config."""
    path = os.path.join(out_dir, CONFIG_SNAPSHOT)
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            if fh.read() != text:
                raise ConfigError(
                    f"{out_dir} already holds a run with a different config")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_manifest(out_dir: str, cfg: FileConfig, started: str, episodes: int):
    artifacts = sorted(name for name in os.listdir(out_dir)
                       if name != MANIFEST_NAME)
    manifest = {
        "version": __version__,
        "protocol": protocol_fingerprint(cfg),
        "seed": cfg.seed,
        "seed_scheme": SEED_SCHEME,
        "evaluator": cfg.evaluator,
        "episodes": episodes,
        "started": started,
        "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "artifacts": artifacts,
    }
    with open(os.path.join(out_dir, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def run_search(config_text: str, out_dir: str | None = None,
               stop_after: int | None = None):
    """Run one configured search, persisting everything into one directory.

    Returns (file config, search outcome).  With an out_dir the directory
    ends up holding the config snapshot, episode log, summary, best plan,
    checkpoint, evaluator net (tiny CNN runs) and a manifest; rerunning with
    a checkpoint present resumes and reproduces the uninterrupted byte
    stream.
    """
    cfg = parse_config(config_text)
    out = out_dir if out_dir is not None else cfg.out_dir
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    evaluator = make_evaluator(cfg)
    scfg = make_search_config(cfg, evaluator, out_dir=out)
    if out:
        os.makedirs(out, exist_ok=True)
        _snapshot_config(out, config_text)
        if cfg.evaluator == "tinycnn":
            save_tinycnn(os.path.join(out, NET_STEM), evaluator.net)
    outcome = search(scfg, stop_after=stop_after)
    if out and outcome.completed:
        _write_manifest(out, cfg, started, outcome.episodes_run)
    return cfg, outcome


def _load_run(run_dir: str):
    """Read back a finished run directory; clean error when it is not one."""
    snapshot = os.path.join(run_dir, CONFIG_SNAPSHOT)
    best_path = os.path.join(run_dir, BEST_NAME)
    if not os.path.isdir(run_dir):
        raise ConfigError(f"{run_dir} is not a directory")
    missing = [os.path.basename(p) for p in (snapshot, best_path)
               if not os.path.exists(p)]
    if missing:
        raise ConfigError(
            f"{run_dir} is not a finished run directory (missing {', '.join(missing)})")
    with open(snapshot, "r", encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    with open(best_path, "r", encoding="utf-8") as fh:
        best = json.load(fh)
    return cfg, best


def _rebuild_evaluator(run_dir: str, cfg: FileConfig):
    net_stem = os.path.join(run_dir, NET_STEM)
    if cfg.evaluator == "tinycnn" and os.path.exists(net_stem + ".manifest"):
        cfg = replace(cfg, pretrained=net_stem)
    return make_evaluator(cfg)


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.6f}" if isinstance(x, float) else str(x)


def report(run_dir: str) -> str:
    """Compare a finished run against the baselines; returns printable text.

    Reads the run directory, recomputes the handcrafted and random baselines
    at the run's own budget and protocol, and emits three sections: the
    policy comparison, reward versus episode, and accuracy versus FLOPs.
    Never writes anything.
    """
    cfg, best = _load_run(run_dir)
    evaluator = _rebuild_evaluator(run_dir, cfg)
    reward_kind = cfg.reward
    learned = evaluate_plan("learned", evaluator, best["ratios"], reward_kind)
    target = cfg.alpha if cfg.constraint == "flops_budget" else learned.flops_fraction

    plans = [learned,
             uniform_policy(evaluator, target, cfg.a_floor, reward_kind),
             graded_policy(evaluator, target, "shallow_aggressive", cfg.a_floor,
                           reward_kind),
             graded_policy(evaluator, target, "deep_aggressive", cfg.a_floor,
                           reward_kind)]
    rand = random_search(evaluator, cfg.episodes, derive_seed(cfg.seed, "random"),
                         cfg.constraint, cfg.alpha, cfg.a_floor, reward_kind,
                         protocol=protocol_fingerprint(cfg))
    plans.append(rand.best)

    lines = [f"run {run_dir}",
             f"protocol {protocol_fingerprint(cfg)}  evaluator {cfg.evaluator}  "
             f"episodes {cfg.episodes}  constraint {cfg.constraint}  "
             f"alpha {_fmt(cfg.alpha)}  reward {reward_kind}",
             "",
             "policy comparison",
             "policy,error,flops_fraction,reward,ratios"]
    for plan in plans:
        ratios = " ".join(f"{a:.4f}" for a in plan.ratios)
        lines.append(f"{plan.name},{_fmt(plan.error)},{_fmt(plan.flops_fraction)},"
                     f"{_fmt(plan.reward)},{ratios}")
    lines.append("note: shallow_aggressive and deep_aggressive use a linear "
                 "depth ramp as a stand-in profile")

    lines += ["", "reward vs episode", "episode,reward,best_reward"]
    summary = os.path.join(run_dir, SUMMARY_NAME)
    if os.path.exists(summary):
        with open(summary, "r", encoding="utf-8") as fh:
            rows = fh.read().splitlines()[1:]
        for row in rows:
            episode, reward, _, _, best_reward = row.split(",")
            lines.append(f"{episode},{reward},{best_reward}")

    lines += ["", "accuracy vs flops_fraction", "policy,flops_fraction,accuracy"]
    for plan in plans:
        lines.append(f"{plan.name},{_fmt(plan.flops_fraction)},{_fmt(1.0 - plan.error)}")
    if best.get("finetuned_error") is not None:
        lines.append(f"learned_finetuned,{_fmt(learned.flops_fraction)},"
                     f"{_fmt(1.0 - best['finetuned_error'])}")
    lines.append("")
    return "\n".join(lines)
