"""Experiment harness: baselines, oracle, random search, configs, run dirs."""

from .config import (CONFIG_DEFAULTS, CONFIG_KEYS, PROXY_BENCH_SEED, FileConfig,
                     load_config, make_evaluator, make_search_config,
                     parse_config, protocol_fingerprint, resolve_config_path)
from .oracle import GRID_STEP, DpResult, dp_oracle
from .policies import (PolicyPlan, continuous_fraction, evaluate_plan,
                       graded_policy, uniform_policy)
from .randsearch import RandomOutcome, random_search
from .runs import report, run_search
from .seeds import SEED_SCHEME, derive_seed

__all__ = [
    "CONFIG_DEFAULTS", "CONFIG_KEYS", "DpResult", "FileConfig", "GRID_STEP",
    "PROXY_BENCH_SEED", "PolicyPlan", "RandomOutcome", "SEED_SCHEME",
    "continuous_fraction", "derive_seed", "dp_oracle", "evaluate_plan",
    "graded_policy", "load_config", "make_evaluator", "make_search_config",
    "parse_config", "protocol_fingerprint", "random_search", "report",
    "resolve_config_path", "run_search", "uniform_policy",
]
