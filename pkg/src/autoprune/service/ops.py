"""The operations behind both the CLI and the HTTP endpoints.

Every op takes plain arguments and returns a JSON-ready dict, so the CLI can
run them in process and the service can wrap them one-to-one.
"""

from __future__ import annotations

import os

from ..environ.rewards import compute_reward
from ..errors import ConfigError
from ..evaluators import accuracy, generate_dataset, pretrain_tinycnn, save_tinycnn
from ..harness import (derive_seed, dp_oracle, graded_policy, make_evaluator,
                       parse_config, protocol_fingerprint, random_search,
                       report, run_search, uniform_policy)
from ..netmodel import conv_flops, load_network, resolve_network_path, total_flops

RANDOM_TRACE_NAME = "random.csv"


def _plan_dict(plan) -> dict:
    return {"name": plan.name, "ratios": list(plan.ratios), "flops": plan.flops,
            "flops_fraction": plan.flops_fraction, "error": plan.error,
            "reward": plan.reward}


def flops_op(network: str) -> dict:
    """Per-layer and total multiply-accumulate counts of a network file."""
    path = resolve_network_path(network)
    net = load_network(path)
    layers = [{"t": l.t, "kind": l.kind, "n": l.n, "c": l.c,
               "flops": conv_flops(l)} for l in net.layers]
    return {"network": os.path.basename(path), "layers": layers,
            "total": total_flops(net)}


def search_op(config: str, out_dir: str | None = None,
              stop_after: int | None = None) -> dict:
    """Run one configured search; see harness.run_search for persistence."""
    cfg, outcome = run_search(config, out_dir=out_dir, stop_after=stop_after)
    best = None
    if outcome.best is not None:
        b = outcome.best
        best = {"name": "learned", "episode": b.episode,
                "ratios": list(b.clamped), "flops": b.flops,
                "flops_fraction": b.flops_fraction, "error": b.error,
                "reward": b.reward}
    return {"best": best, "episodes_run": outcome.episodes_run,
            "completed": outcome.completed, "out_dir": outcome.out_dir,
            "finetuned_error": outcome.finetuned_error,
            "protocol": protocol_fingerprint(cfg)}


def _baseline_target(cfg) -> float:
    if cfg.constraint != "flops_budget":
        raise ConfigError("baselines need constraint = flops_budget with alpha")
    return cfg.alpha


def baseline_op(config: str, policy: str) -> dict:
    """Handcrafted plans at the config's budget; policy may be 'all'."""
    cfg = parse_config(config)
    target = _baseline_target(cfg)
    evaluator = make_evaluator(cfg)
    names = (["uniform", "shallow_aggressive", "deep_aggressive"]
             if policy == "all" else [policy])
    plans = []
    for name in names:
        if name == "uniform":
            plan = uniform_policy(evaluator, target, cfg.a_floor, cfg.reward)
        elif name in ("shallow_aggressive", "deep_aggressive"):
            plan = graded_policy(evaluator, target, name, cfg.a_floor, cfg.reward)
        else:
            raise ConfigError(f"unknown policy {name!r}")
        plans.append(_plan_dict(plan))
    return {"plans": plans, "protocol": protocol_fingerprint(cfg)}


def random_op(config: str, out_dir: str | None = None) -> dict:
    """Random search under the config's constraint; optional trace CSV."""
    cfg = parse_config(config)
    evaluator = make_evaluator(cfg)
    outcome = random_search(evaluator, cfg.episodes, derive_seed(cfg.seed, "random"),
                            cfg.constraint, cfg.alpha, cfg.a_floor, cfg.reward,
                            protocol=protocol_fingerprint(cfg))
    out = out_dir if out_dir is not None else cfg.out_dir
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, RANDOM_TRACE_NAME), "w", encoding="utf-8") as fh:
            fh.write("episode,reward,error,flops_fraction,best_reward\n")
            for row in outcome.trace:
                fh.write(f"{row['episode']},{row['reward']!r},{row['error']!r},"
                         f"{row['flops_fraction']!r},{row['best_so_far']!r}\n")
    return {"best": _plan_dict(outcome.best), "episodes": len(outcome.trace),
            "out_dir": out, "protocol": protocol_fingerprint(cfg)}


def oracle_op(config: str) -> dict:
    """Exact grid optimum for a proxy config's budget."""
    cfg = parse_config(config)
    if cfg.evaluator != "proxy":
        raise ConfigError("the oracle needs evaluator = proxy")
    target = _baseline_target(cfg)
    evaluator = make_evaluator(cfg)
    result = dp_oracle(evaluator.model, target, cfg.grid_step,
                       evaluator.fixed_flops)
    flops = evaluator.flops(list(result.ratios))
    reward = compute_reward(cfg.reward, result.error, flops)
    return {"ratios": list(result.ratios), "error": result.error,
            "reward": reward, "flops": flops,
            "flops_fraction": flops / float(total_flops(evaluator.network)),
            "protocol": protocol_fingerprint(cfg)}


def pretrain_op(config: str = "", out_stem: str | None = None) -> dict:
    """Pretrain the tiny CNN named by the config; optionally checkpoint it."""
    cfg = parse_config(config)
    dataset = generate_dataset(cfg.dataset_seed)
    net, acc = pretrain_tinycnn(dataset, epochs=cfg.pretrain_epochs,
                                seed=cfg.pretrain_seed)
    if out_stem:
        parent = os.path.dirname(out_stem)
        if parent:
            os.makedirs(parent, exist_ok=True)
        save_tinycnn(out_stem, net)
    return {"accuracy": acc, "epochs": cfg.pretrain_epochs,
            "val_accuracy_recheck": accuracy(net, dataset.val_x, dataset.val_y),
            "out_stem": out_stem}


def report_op(run_dir: str) -> dict:
    """Render the comparison report for a finished run directory."""
    return {"text": report(run_dir)}
