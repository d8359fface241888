"""Compression environment: budget clamp, rewards, episodes, search loop."""

from .budget import (BudgetState, check_budget_feasible, clamp_action,
                     clamp_plan, floor_plan_flops, rest_fixed_flops,
                     rounding_slack, walk_bookkeeping)
from .episode import EpisodeResult, run_episode
from .rewards import compute_reward, reward_err, reward_flops
from .search import (SearchConfig, SearchOutcome, build_agent, format_log_line,
                     search, validate_config)

__all__ = [
    "BudgetState", "EpisodeResult", "SearchConfig", "SearchOutcome",
    "build_agent", "check_budget_feasible", "clamp_action", "clamp_plan",
    "compute_reward", "floor_plan_flops", "format_log_line", "rest_fixed_flops",
    "reward_err", "reward_flops", "rounding_slack", "run_episode", "search",
    "validate_config", "walk_bookkeeping",
]
