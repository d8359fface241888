"""Flat key=value run configs: parsing, evaluator construction, fingerprints."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace

from ..agent import NoiseSchedule
from ..environ.search import SearchConfig
from ..errors import ConfigError
from ..evaluators import (ProxyEvaluator, TinyCnnEvaluator, generate_dataset,
                          load_tinycnn, make_proxy, pretrain_tinycnn)
from ..netmodel import load_network, resolve_network_path
from .seeds import SEED_SCHEME, derive_seed

PROXY_BENCH_SEED = 13


@dataclass(frozen=True)
class FileConfig:
    """Typed view of one run config file."""

    episodes: int = 400
    warmup_episodes: int = 100
    warmup_sigma: float = 0.5
    final_sigma: float = 0.01
    reward: str = "err"
    constraint: str = "none"
    alpha: float | None = None
    a_floor: float = 0.05
    batch_size: int = 64
    buffer_capacity: int = 2000
    tau: float = 0.01
    baseline_decay: float = 0.95
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    hidden_sizes: tuple[int, ...] = (300, 300)
    evaluator: str = "proxy"
    seed: int = 0
    out_dir: str | None = None
    network: str | None = None
    gamma: float = 1.0
    proxy_seed: int = PROXY_BENCH_SEED
    base_error: float = 0.05
    dataset_seed: int = 7
    pretrain_epochs: int = 30
    pretrain_seed: int = 1
    pretrained: str | None = None
    finetune: bool = False
    finetune_fraction: float = 0.1
    checkpoint_every: int = 50
    grid_step: float = 0.05


CONFIG_DEFAULTS = FileConfig()
CONFIG_KEYS = tuple(f.name for f in fields(FileConfig))

_INT_KEYS = {"episodes", "warmup_episodes", "batch_size", "buffer_capacity",
             "seed", "proxy_seed", "dataset_seed", "pretrain_epochs",
             "pretrain_seed", "checkpoint_every"}
_FLOAT_KEYS = {"warmup_sigma", "final_sigma", "alpha", "a_floor", "tau",
               "baseline_decay", "actor_lr", "critic_lr", "gamma", "base_error",
               "finetune_fraction", "grid_step"}
_STR_KEYS = {"reward", "constraint", "evaluator", "out_dir", "network", "pretrained"}
_BOOL_KEYS = {"finetune"}


def _convert(key: str, value: str, lineno: int):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            if value not in ("0", "1", "true", "false"):
                raise ValueError(value)
            return value in ("1", "true")
        if key == "hidden_sizes":
            return tuple(int(p) for p in value.split(",") if p.strip())
        return value
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value {value!r} for {key}") from None


def parse_config(text: str) -> FileConfig:
    """Parse ``key = value`` lines; # comments and blank lines are skipped."""
    seen: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        seen[key] = _convert(key, value, lineno)
    return replace(CONFIG_DEFAULTS, **seen)


def load_config(path: str) -> FileConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def resolve_config_path(name: str) -> str:
    """Resolve a config argument: an existing path wins, then bundled .cfg files."""
    import os

    candidates = [name] if name.endswith(".cfg") else [name, name + ".cfg"]
    for cand in candidates:
        if os.path.exists(cand):
            return cand
        bundled = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data",
                               os.path.basename(cand))
        if os.path.exists(bundled):
            return bundled
    raise FileNotFoundError(f"no such config file: {name} (and no bundled copy)")


def make_evaluator(cfg: FileConfig):
    """Build the evaluator a config names, pretraining or loading as needed."""
    if cfg.evaluator == "proxy":
        network = load_network(resolve_network_path(cfg.network or "proxy5"))
        model = make_proxy(network, cfg.proxy_seed, base_error=cfg.base_error)
        return ProxyEvaluator(network, model)
    if cfg.evaluator == "tinycnn":
        network = load_network(resolve_network_path(cfg.network or "tinycnn"))
        dataset = generate_dataset(cfg.dataset_seed)
        if cfg.pretrained:
            net = load_tinycnn(cfg.pretrained)
        else:
            net, _ = pretrain_tinycnn(dataset, epochs=cfg.pretrain_epochs,
                                      seed=cfg.pretrain_seed)
        return TinyCnnEvaluator(network, net, dataset)
    raise ConfigError(f"unknown evaluator {cfg.evaluator!r}")


def protocol_fingerprint(cfg: FileConfig) -> str:
    """Digest of everything that defines a comparable trial.

    Two logs belong to the same comparison protocol exactly when their
    fingerprints match: same task (evaluator fixture, network, reward,
    constraint, budget), same schedule, same episode budget, same master seed
    and derivation scheme.
    """
    parts = [
        f"scheme={SEED_SCHEME}",
        f"evaluator={cfg.evaluator}",
        f"network={cfg.network or ('proxy5' if cfg.evaluator == 'proxy' else 'tinycnn')}",
        f"reward={cfg.reward}",
        f"constraint={cfg.constraint}",
        f"alpha={cfg.alpha}",
        f"a_floor={cfg.a_floor}",
        f"episodes={cfg.episodes}",
        f"warmup_episodes={cfg.warmup_episodes}",
        f"warmup_sigma={cfg.warmup_sigma}",
        f"final_sigma={cfg.final_sigma}",
        f"seed={cfg.seed}",
    ]
    if cfg.evaluator == "proxy":
        parts += [f"proxy_seed={cfg.proxy_seed}", f"base_error={cfg.base_error}"]
    else:
        parts += [f"dataset_seed={cfg.dataset_seed}",
                  f"pretrain_epochs={cfg.pretrain_epochs}",
                  f"pretrain_seed={cfg.pretrain_seed}"]
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()
    return digest[:12]


def make_search_config(cfg: FileConfig, evaluator, out_dir: str | None = None) -> SearchConfig:
    """Translate a file config into the search loop's config."""
    if cfg.episodes <= cfg.warmup_episodes:
        raise ConfigError(
            f"episodes {cfg.episodes} must exceed warmup_episodes {cfg.warmup_episodes}")
    schedule = NoiseSchedule(warmup_episodes=cfg.warmup_episodes,
                             warmup_sigma=cfg.warmup_sigma,
                             decay_episodes=cfg.episodes - cfg.warmup_episodes,
                             final_sigma=cfg.final_sigma)
    return SearchConfig(
        evaluator=evaluator, episodes=cfg.episodes, schedule=schedule,
        reward=cfg.reward, constraint=cfg.constraint, alpha=cfg.alpha,
        a_floor=cfg.a_floor, batch_size=cfg.batch_size,
        buffer_capacity=cfg.buffer_capacity, tau=cfg.tau, gamma=cfg.gamma,
        baseline_decay=cfg.baseline_decay, actor_lr=cfg.actor_lr,
        critic_lr=cfg.critic_lr, hidden=cfg.hidden_sizes,
        seed=derive_seed(cfg.seed, "agent"),
        out_dir=out_dir if out_dir is not None else cfg.out_dir,
        finetune=cfg.finetune, finetune_fraction=cfg.finetune_fraction,
        checkpoint_every=cfg.checkpoint_every,
        protocol=protocol_fingerprint(cfg))
