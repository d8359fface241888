"""Environment: budget clamp, rewards, episode walk, search loop."""

import json
import math
import os

import numpy as np
import pytest

from autoprune.agent import NoiseSchedule, ReplayBuffer
from autoprune.environ import (
    BudgetState,
    SearchConfig,
    check_budget_feasible,
    clamp_action,
    floor_plan_flops,
    reward_err,
    reward_flops,
    rounding_slack,
    run_episode,
    search,
    validate_config,
)
from autoprune.environ.search import build_agent
from autoprune.errors import ConfigError
from autoprune.evaluators import ProxyEvaluator, ProxyModel, make_proxy
from autoprune.netmodel import (LayerSpec, NetworkSpec, apply_ratios, load_network,
                                resolve_network_path, total_flops)

PROXY_NET = load_network(resolve_network_path("proxy5"))


def proxy_evaluator(seed=11):
    return ProxyEvaluator(PROXY_NET, make_proxy(PROXY_NET, seed=seed))


def quick_config(**kw):
    kw.setdefault("evaluator", proxy_evaluator())
    kw.setdefault("episodes", 20)
    kw.setdefault("schedule", NoiseSchedule(warmup_episodes=5, decay_episodes=15))
    kw.setdefault("hidden", (16, 16))
    kw.setdefault("batch_size", 16)
    return SearchConfig(**kw)


def saturate_actor(agent, bias):
    """Push the actor's output head so sigmoid saturates deterministically."""
    agent.actor.biases[-1][:] = bias
    agent.actor_target.biases[-1][:] = bias


class FakeChained:
    """Chained-accounting evaluator with a constant error."""

    accounting = "chained"

    def __init__(self, network, error=0.1):
        self.network = network
        self._error = error

    @property
    def layer_count(self):
        return len(self.network.prunable_ts())

    def base_error(self):
        return self._error

    def evaluate(self, ratios):
        return self._error

    def flops(self, ratios):
        return float(total_flops(apply_ratios(self.network, list(ratios))))


class FailOn:
    """Proxy evaluator wrapper that fails on chosen evaluation calls."""

    def __init__(self, inner, fail_calls):
        self.inner = inner
        self.network = inner.network
        self.accounting = inner.accounting
        self.fail_calls = set(fail_calls)
        self.calls = 0

    @property
    def layer_count(self):
        return self.inner.layer_count

    def base_error(self):
        return self.inner.base_error()

    def evaluate(self, ratios):
        self.calls += 1
        if self.calls in self.fail_calls:
            raise RuntimeError("synthetic evaluator outage")
        return self.inner.evaluate(ratios)

    def flops(self, ratios):
        return self.inner.flops(ratios)


# ------------------------------------------------------------------- budget

def test_budget_state_validation():
    with pytest.raises(ConfigError):
        BudgetState(10, 5, -1, 3)
    with pytest.raises(ConfigError):
        BudgetState(10, 5, 0, 3, f_rest_fixed=4)


def test_clamp_noop_when_budget_slack():
    b = BudgetState(300, 300, 0, 200)
    rng = np.random.Generator(np.random.PCG64(0))
    for _ in range(50):
        a = float(rng.uniform(0.05, 1.0))
        got, tight = clamp_action(a, 100, b, 1.0, 0.05)
        assert got == a and not tight


def test_clamp_floor_when_exhausted():
    b = BudgetState(300, 150, 140, 100)
    got, tight = clamp_action(0.9, 100, b, 1.0, 0.2)
    assert got == 0.2 and tight


def test_clamp_floor_when_cap_below_floor():
    # m = 150 - 100 - 20 = 30; cap = 30/100 = 0.3 >= floor: clamps to cap
    b = BudgetState(300, 150, 100, 100, f_rest_fixed=0)
    got, tight = clamp_action(0.9, 100, b, 1.0, 0.2)
    assert got == pytest.approx(0.3) and not tight
    # shrink budget so cap dips under the floor
    b2 = BudgetState(300, 130, 100, 100)
    got2, tight2 = clamp_action(0.9, 100, b2, 1.0, 0.2)
    assert got2 == 0.2 and tight2


def test_clamp_three_equal_layers_walkthrough():
    """Greedy requests under alpha=0.5 land exactly on budget; oracle confirms."""
    f, alpha, floor = 1.0, 0.5, 0.2
    budget = alpha * 3 * f
    done, taken = 0.0, []
    for t in range(3):
        rest = f * (2 - t)
        a, tight = clamp_action(1.0, f, BudgetState(3 * f, budget, done, rest),
                                1.0, floor)
        assert not tight
        taken.append(a)
        done += a * f
    assert taken[0] == 1.0
    assert taken == [1.0, pytest.approx(0.3), pytest.approx(0.2)]
    assert done == pytest.approx(budget)

    # exhaustive feasibility oracle: any clamped prefix can still finish in budget
    grid = np.linspace(floor, 1.0, 17)
    def finishes(prefix_cost, layers_left):
        return prefix_cost + floor * f * layers_left <= budget + 1e-9
    for a1 in grid:
        c1, _ = clamp_action(float(a1), f, BudgetState(3 * f, budget, 0.0, 2 * f),
                             1.0, floor)
        assert finishes(c1 * f, 2)
        for a2 in grid:
            c2, _ = clamp_action(float(a2), f,
                                 BudgetState(3 * f, budget, c1 * f, f), 1.0, floor)
            assert finishes(c1 * f + c2 * f, 1)
            for a3 in grid:
                c3, _ = clamp_action(float(a3), f,
                                     BudgetState(3 * f, budget, (c1 + c2) * f, 0.0),
                                     1.0, floor)
                assert (c1 + c2 + c3) * f <= budget + 1e-9


def test_clamp_uses_incoming_ratio():
    # halved input halves the layer's true cost, doubling the allowed ratio cap
    b = BudgetState(300, 150, 100, 50)
    full, _ = clamp_action(1.0, 100, b, 1.0, 0.2)
    halved, _ = clamp_action(1.0, 100, b, 0.5, 0.2)
    assert halved == min(1.0, 2 * full) or halved == pytest.approx(2 * full)


def test_feasibility_check_linear_and_chained():
    check_budget_feasible(PROXY_NET, 0.2, 0.05, "linear")
    with pytest.raises(ConfigError):
        check_budget_feasible(PROXY_NET, 0.04, 0.05, "linear")
    with pytest.raises(ConfigError):
        check_budget_feasible(PROXY_NET, 1.5, 0.05, "linear")
    tiny = load_network(resolve_network_path("tinycnn"))
    check_budget_feasible(tiny, 0.5, 0.2, "chained")
    with pytest.raises(ConfigError):
        check_budget_feasible(tiny, 0.01, 0.2, "chained")


def test_floor_plan_flops_modes():
    net = NetworkSpec((
        LayerSpec(1, "conv", n=10, c=3, h=8, w=8, k=1, prev=0),
        LayerSpec(2, "dense", n=5, c=10, prev=1, prunable=False),
    ))
    f1 = 10 * 3 * 64
    linear = floor_plan_flops(net, 0.1, "linear")
    assert linear == pytest.approx(0.1 * f1 + 50)
    chained = floor_plan_flops(net, 0.1, "chained")
    assert chained == 1 * 3 * 64 + 5 * 1  # keep 1 of 10 channels


def test_rounding_slack_hand_sum():
    net = NetworkSpec((
        LayerSpec(1, "conv", n=4, c=2, h=4, w=4, k=1, prev=0),
        LayerSpec(2, "conv", n=8, c=4, h=4, w=4, k=1, prev=1),
    ))
    f1, f2 = 4 * 2 * 16, 8 * 4 * 16
    expect = f1 * (1 / 4 + 1 / 2 + 1 / 8) + f2 * (1 / 8 + 1 / 4 + 1 / 32)
    assert rounding_slack(net) == pytest.approx(expect)


# ------------------------------------------------------------------- rewards

def test_reward_err_values_and_domain():
    assert reward_err(0.3) == -0.3
    assert reward_err(0.0) == 0.0
    assert reward_err(1.0) == -1.0
    with pytest.raises(ValueError):
        reward_err(1.2)
    with pytest.raises(ValueError):
        reward_err(-0.1)


def test_reward_flops_values_and_domain():
    assert reward_flops(0.1, 1e9) == pytest.approx(-2.0723, abs=1e-3)
    assert reward_flops(0.0, 12345) == 0.0
    assert reward_flops(0.2, 100) < reward_flops(0.2, 50)
    with pytest.raises(ValueError):
        reward_flops(0.1, 1)


# ------------------------------------------------------------------- episode

def test_identity_policy_reproduces_base_error():
    ev = proxy_evaluator()
    cfg = quick_config(evaluator=ev)
    agent = build_agent(cfg)
    saturate_actor(agent, 1000.0)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    result = run_episode(agent, buffer, PROXY_NET, ev, cfg, 0, sigma=0.0)
    assert result.requested == (1.0,) * 5
    assert result.clamped == (1.0,) * 5
    assert result.error == ev.base_error()
    assert result.reward == -ev.base_error()
    assert result.flops_fraction == 1.0


def test_episode_transitions_share_reward_and_chain():
    ev = proxy_evaluator()
    cfg = quick_config(evaluator=ev)
    agent = build_agent(cfg)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    result = run_episode(agent, buffer, PROXY_NET, ev, cfg, 0, sigma=0.3)
    items = buffer.items()
    assert len(items) == 5
    for tr in items:
        assert tr.r == result.reward
    for i in range(4):
        assert not items[i].terminal
        assert np.array_equal(items[i].s_next, items[i + 1].s)
    assert items[4].terminal
    assert np.array_equal(items[4].s_next, np.zeros(11))
    assert tuple(tr.a for tr in items) == result.clamped


def test_episode_deterministic_given_seed():
    ev = proxy_evaluator()
    cfg = quick_config(evaluator=ev)
    results = []
    for _ in range(2):
        agent = build_agent(cfg)
        buffer = ReplayBuffer(cfg.buffer_capacity)
        results.append(run_episode(agent, buffer, PROXY_NET, ev, cfg, 0, sigma=0.4))
    a, b = results
    assert a.requested == b.requested
    assert a.clamped == b.clamped
    assert a.reward == b.reward


def test_episode_budget_never_exceeded_linear():
    ev = proxy_evaluator()
    cfg = quick_config(evaluator=ev, constraint="flops_budget", alpha=0.5)
    budget = 0.5 * total_flops(PROXY_NET)
    for seed in range(10):
        agent = build_agent(quick_config(evaluator=ev, seed=seed,
                                         constraint="flops_budget", alpha=0.5))
        buffer = ReplayBuffer(cfg.buffer_capacity)
        for e in range(5):
            r = run_episode(agent, buffer, PROXY_NET, ev, cfg, e, sigma=0.5)
            assert r.flops <= budget * (1 + 1e-12)


def test_episode_budget_chained_within_slack():
    tiny = load_network(resolve_network_path("tinycnn"))
    ev = FakeChained(tiny)
    cfg = quick_config(evaluator=ev, constraint="flops_budget", alpha=0.5)
    budget = 0.5 * total_flops(tiny)
    slack = rounding_slack(tiny)
    for seed in range(10):
        agent = build_agent(quick_config(evaluator=ev, seed=seed,
                                         constraint="flops_budget", alpha=0.5))
        buffer = ReplayBuffer(cfg.buffer_capacity)
        for e in range(5):
            r = run_episode(agent, buffer, tiny, ev, cfg, e, sigma=0.5)
            assert r.flops <= budget + slack


def test_linear_walk_bookkeeping_by_hand():
    """Frozen mid-range actor: check the stored normalized states exactly."""
    net = NetworkSpec((
        LayerSpec(1, "conv", n=8, c=3, h=4, w=4, k=1, prev=0),
        LayerSpec(2, "conv", n=8, c=8, h=4, w=4, k=1, prev=1),
    ))
    f1, f2 = (8 * 3 * 16), (8 * 8 * 16)
    model = ProxyModel((0.01, 0.01), 0.05, 2.0, (f1, f2))
    ev = ProxyEvaluator(net, model)
    cfg = quick_config(evaluator=ev)
    agent = build_agent(cfg)  # zero-init nets give mu = 0.5 exactly
    for w, bias in zip(agent.actor.weights, agent.actor.biases):
        w[:] = 0.0
        bias[:] = 0.0
    buffer = ReplayBuffer(cfg.buffer_capacity)
    run_episode(agent, buffer, net, ev, cfg, 0, sigma=0.0)
    s1, s2 = (tr.s for tr in buffer.items())
    total = f1 + f2
    assert s1[0] == 0.0 and s2[0] == 1.0            # layer index feature
    assert s1[8] == 0.0                             # nothing reduced yet
    assert s2[8] == pytest.approx(0.5 * f1 / total)  # half of layer 1 gone
    assert s1[9] == pytest.approx(f2 / total)       # rest ahead of layer 1
    assert s2[9] == 0.0
    assert s1[10] == 1.0 and s2[10] == 0.5          # previous action feature


def test_chained_walk_compresses_state_flops():
    """Second layer's cost feature reflects the first layer's pruning."""
    net = NetworkSpec((
        LayerSpec(1, "conv", n=8, c=3, h=4, w=4, k=1, prev=0),
        LayerSpec(2, "conv", n=8, c=8, h=4, w=4, k=1, prev=1),
    ))
    ev = FakeChained(net)
    cfg = quick_config(evaluator=ev)
    agent = build_agent(cfg)
    for w, bias in zip(agent.actor.weights, agent.actor.biases):
        w[:] = 0.0
        bias[:] = 0.0
    buffer = ReplayBuffer(cfg.buffer_capacity)
    run_episode(agent, buffer, net, ev, cfg, 0, sigma=0.0)
    s1, s2 = (tr.s for tr in buffer.items())
    # layer 2 sees c = keep(0.5 * 8) = 4 survivors, so its cost is 8*4*16 = 512;
    # the feature is min-max scaled over the original costs {384, 1024}
    assert s1[7] == 0.0
    assert s2[7] == pytest.approx((512 - 384) / (1024 - 384))


def test_failed_evaluation_marks_episode(tmp_path):
    ev = FailOn(proxy_evaluator(), fail_calls={2})
    cfg = quick_config(evaluator=ev, episodes=4, out_dir=str(tmp_path),
                       schedule=NoiseSchedule(warmup_episodes=2, decay_episodes=2))
    out = search(cfg)
    assert out.episodes_run == 4
    lines = [json.loads(l) for l in open(tmp_path / "episodes.log")]
    assert [rec["failed"] for rec in lines] == [False, True, False, False]
    failed = lines[1]
    assert failed["error"] is None and failed["reward"] is None
    assert out.best is not None and out.best.episode != 1


# -------------------------------------------------------------------- search

def test_search_single_episode_is_best():
    cfg = quick_config(episodes=1,
                       schedule=NoiseSchedule(warmup_episodes=1, decay_episodes=1))
    out = search(cfg)
    assert out.best is not None and out.best.episode == 0
    assert out.completed and out.episodes_run == 1


def test_search_best_so_far_monotone(tmp_path):
    cfg = quick_config(out_dir=str(tmp_path), seed=5)
    search(cfg)
    best = [json.loads(l)["best_so_far"] for l in open(tmp_path / "episodes.log")]
    assert all(b is not None for b in best)
    assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))


def test_search_log_fields_and_summary(tmp_path):
    cfg = quick_config(out_dir=str(tmp_path))
    search(cfg)
    lines = open(tmp_path / "episodes.log").readlines()
    assert len(lines) == cfg.episodes
    rec = json.loads(lines[0])
    assert list(rec) == ["episode", "sigma", "actions", "clamped", "flops",
                         "flops_fraction", "error", "reward", "baseline",
                         "best_so_far", "budget_tight", "failed", "protocol"]
    assert len(rec["actions"]) == 5
    summary = open(tmp_path / "summary.csv").readlines()
    assert summary[0] == "episode,reward,error,flops_fraction,best_reward\n"
    assert len(summary) == cfg.episodes + 1
    best = json.load(open(tmp_path / "best.json"))
    assert best["ratios"] == list(json.loads(lines[best["episode"]])["clamped"])


def test_search_deterministic_logs(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    search(quick_config(out_dir=str(d1), seed=9))
    search(quick_config(out_dir=str(d2), seed=9))
    assert (d1 / "episodes.log").read_bytes() == (d2 / "episodes.log").read_bytes()
    assert (d1 / "summary.csv").read_bytes() == (d2 / "summary.csv").read_bytes()
    assert (d1 / "best.json").read_bytes() == (d2 / "best.json").read_bytes()


def test_search_resume_matches_uninterrupted(tmp_path):
    d1, d2 = tmp_path / "full", tmp_path / "parts"
    cfg1 = quick_config(out_dir=str(d1), seed=4, episodes=30,
                        schedule=NoiseSchedule(warmup_episodes=8, decay_episodes=22),
                        checkpoint_every=7)
    cfg2 = quick_config(out_dir=str(d2), seed=4, episodes=30,
                        schedule=NoiseSchedule(warmup_episodes=8, decay_episodes=22),
                        checkpoint_every=7)
    search(cfg1)
    part = search(cfg2, stop_after=13)
    assert not part.completed and part.episodes_run == 13
    out = search(cfg2)
    assert out.completed and out.episodes_run == 30
    assert (d1 / "episodes.log").read_bytes() == (d2 / "episodes.log").read_bytes()
    assert (d1 / "summary.csv").read_bytes() == (d2 / "summary.csv").read_bytes()
    assert (d1 / "best.json").read_bytes() == (d2 / "best.json").read_bytes()


def test_search_clamped_equals_requested_on_slack_budget(tmp_path):
    cfg = quick_config(out_dir=str(tmp_path), constraint="flops_budget", alpha=1.0)
    search(cfg)
    for line in open(tmp_path / "episodes.log"):
        rec = json.loads(line)
        assert rec["clamped"] == rec["actions"]
        assert not rec["budget_tight"]


def test_search_reward_flops_compresses():
    cfg = quick_config(reward="flops")
    out = search(cfg)
    assert out.best.flops_fraction < 1.0


def test_search_infeasible_budget_aborts(tmp_path):
    cfg = quick_config(constraint="flops_budget", alpha=0.01,
                       out_dir=str(tmp_path / "run"))
    with pytest.raises(ConfigError):
        search(cfg)
    assert not os.path.exists(tmp_path / "run" / "episodes.log")


def test_validate_config_rejects_bad_combinations():
    with pytest.raises(ConfigError):
        validate_config(quick_config(reward="accuracy"))
    with pytest.raises(ConfigError):
        validate_config(quick_config(constraint="latency"))
    with pytest.raises(ConfigError):
        validate_config(quick_config(alpha=0.5))
    with pytest.raises(ConfigError):
        validate_config(quick_config(constraint="flops_budget"))
    with pytest.raises(ConfigError):
        validate_config(quick_config(constraint="flops_budget", alpha=1.3))
    with pytest.raises(ConfigError):
        validate_config(quick_config(episodes=3))
    with pytest.raises(ConfigError):
        validate_config(quick_config(batch_size=64, buffer_capacity=32))


def test_search_without_out_dir_writes_nothing(tmp_path):
    before = set(os.listdir(tmp_path))
    out = search(quick_config())
    assert out.best is not None and out.out_dir is None
    assert set(os.listdir(tmp_path)) == before
