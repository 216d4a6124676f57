import numpy as np
import pytest

from robustgraph.baselines import BaselineKind, run_baseline
from robustgraph.env import (
    PUBLISHED_BUDGETS,
    EnvState,
    EpisodeConfig,
    first_action_policy,
    random_policy,
    reset,
    run_episode,
    scale_budget,
    step,
    tau_to_budget,
    valid_actions,
)
from robustgraph.errors import DisconnectedGraphError, InvalidActionError, TerminalStateError
from robustgraph.generators import Family, GeneratorSpec, generate
from robustgraph.graph import Graph, complete_graph, path_graph, star_graph
from robustgraph.robustness import RANDOM, TARGETED, estimate_robustness, exact_robustness

CFG1 = EpisodeConfig(RANDOM, 1, n_sims=50)


def test_config_validation():
    with pytest.raises(ValueError):
        EpisodeConfig(RANDOM, 0)


def test_state_invariant():
    with pytest.raises(ValueError):
        EnvState(path_graph(3), 0, 0, 0.0)
    with pytest.raises(ValueError):
        EnvState(path_graph(3), None, 1, 0.0)


def test_valid_actions_examples():
    s = reset(path_graph(3), CFG1, 0)
    assert valid_actions(s) == [0, 2]
    s1 = step(s, 0, CFG1, 0).next_state
    assert valid_actions(s1) == [2]
    k4 = EnvState(complete_graph(4), None, 0, 1.0)
    assert valid_actions(k4) == []


def test_reset_checks():
    with pytest.raises(DisconnectedGraphError):
        reset(Graph(3, [(0, 1)]), CFG1, 0)
    with pytest.raises(ValueError):
        reset(path_graph(3), EpisodeConfig(RANDOM, 2), 0)


def test_first_step_sets_stub():
    g = star_graph(5)
    s = reset(g, CFG1, 0)
    out = step(s, 3, CFG1, 0)
    assert out.next_state.edge_stub == 3 and out.next_state.graph is g
    assert out.reward == 0.0 and not out.terminal


def test_second_step_adds_edge_and_pays():
    g = star_graph(5)
    s = reset(g, CFG1, 0, f_initial=0.25)
    s = step(s, 1, CFG1, 0).next_state
    out = step(s, 2, CFG1, np.random.default_rng(4))
    assert out.terminal and out.next_state.graph.has_edge(1, 2)
    expected = estimate_robustness(out.next_state.graph, RANDOM, 50, np.random.default_rng(4)).mean - 0.25
    assert out.reward == pytest.approx(expected, abs=1e-15)
    with pytest.raises(TerminalStateError):
        step(out.next_state, 3, CFG1, 0)
    with pytest.raises(TerminalStateError):
        valid_actions(out.next_state)


def test_invalid_action():
    s = reset(path_graph(3), CFG1, 0)
    with pytest.raises(InvalidActionError):
        step(s, 1, CFG1, 0)


def test_reward_is_final_minus_initial():
    # three additions turn P_4 into K_4, whose value is exactly 1
    cfg = EpisodeConfig(TARGETED, 3, n_sims=20)
    ep = run_episode(path_graph(4), random_policy(1), cfg, 0, f_initial=0.1)
    assert ep.graph == complete_graph(4)
    assert ep.reward == pytest.approx(0.9, abs=1e-15)
    assert all(r == 0.0 for *_, r in ep.log[:-1])


def test_random_policy_on_p3():
    cfg = EpisodeConfig(RANDOM, 1, n_sims=4000)
    ep = run_episode(path_graph(3), random_policy(3), cfg, 3)
    assert ep.graph == complete_graph(3)
    expected = exact_robustness(complete_graph(3), RANDOM) - exact_robustness(path_graph(3), RANDOM)
    assert abs(ep.reward - expected) < 0.03


def test_first_action_policy_deterministic():
    g = generate(GeneratorSpec(Family.BA, 12, seed=1))
    cfg = EpisodeConfig(RANDOM, 3, n_sims=10)
    a = run_episode(g, first_action_policy, cfg, 0)
    b = run_episode(g, first_action_policy, cfg, 0)
    assert a.added_edges == b.added_edges and a.reward == b.reward


def test_episode_invariants():
    for seed in range(10):
        g = generate(GeneratorSpec(Family.ER, 12, seed=seed))
        cfg = EpisodeConfig(RANDOM, 4, n_sims=30)
        ep = run_episode(g, random_policy(seed), cfg, seed)
        assert len(ep.added_edges) == 4 == ep.graph.num_edges - g.num_edges
        assert len(set(map(frozenset, ep.added_edges))) == 4
        assert set(g.edges()) <= set(ep.graph.edges())
        assert len(ep.log) == 8
        assert sum(r for *_, r in ep.log) == ep.log[-1][3] == ep.reward


def test_final_addition_completes_graph():
    # K_4 minus one edge has a single absent pair
    g = complete_graph(4)
    g.remove_edge_inplace(0, 1)
    cfg = EpisodeConfig(RANDOM, 1, n_sims=10)
    ep = run_episode(g, first_action_policy, cfg, 0)
    assert ep.graph.is_complete() and len(ep.log) == 2


def test_random_objective_rewards_not_significantly_negative():
    for seed in range(10):
        g = generate(GeneratorSpec(Family.BA, 15, seed=seed))
        cfg = EpisodeConfig(RANDOM, 2, n_sims=2000)
        rng = np.random.default_rng(seed)
        f0 = estimate_robustness(g, RANDOM, 2000, rng)
        ep = run_episode(g, random_policy(seed), cfg, rng, f_initial=f0.mean)
        f1 = estimate_robustness(ep.graph, RANDOM, 2000, np.random.default_rng(seed + 100))
        assert ep.reward >= -3 * np.hypot(f0.std_error, f1.std_error)


def test_trajectory_log_format():
    ep = run_episode(path_graph(3), first_action_policy, CFG1, 0)
    lines = ep.format_log().splitlines()
    assert lines[0] == "step\tstub\taction\treward"
    assert lines[1].startswith("0\t-\t0\t")
    assert lines[2].startswith("1\t0\t2\t")


def test_budgets():
    assert tau_to_budget(1, 20) == 2
    assert tau_to_budget(5, 20) == 10
    assert tau_to_budget(2, 20) == 4  # published value is 5
    assert PUBLISHED_BUDGETS[2] == 5
    assert scale_budget(2, 20, 40, "nodes") == 4
    assert scale_budget(2, 20, 40, "pairs") == 8
    assert scale_budget(5, 20, 20) == 5
    with pytest.raises(ValueError):
        scale_budget(2, 20, 40, "edges")


def test_run_baseline_ldp_p4():
    cfg = EpisodeConfig(RANDOM, 1, n_sims=20000)
    ep = run_baseline(path_graph(4), BaselineKind.LDP, cfg, 0)
    from robustgraph.graph import cycle_graph
    assert ep.graph == cycle_graph(4)
    expected = exact_robustness(cycle_graph(4), RANDOM) - exact_robustness(path_graph(4), RANDOM)
    assert abs(ep.reward - expected) < 0.01
