"""Graph improvement MDP: edges are added one node selection at a time.

A state carries the current graph and an optional *edge stub*, the first
endpoint of a pending edge. Selecting a node with no stub sets the stub;
selecting a node with a stub adds the edge and clears it. After ``2L``
selections the episode ends and the only nonzero reward is paid:
``F(G_final) - F(G_0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

from .errors import DisconnectedGraphError, InvalidActionError, TerminalStateError
from .graph import Graph
from .robustness import RemovalStrategy, as_rng, estimate_robustness

# (tau percent -> L) used for the 20-node synthetic experiments
PUBLISHED_BUDGETS = {1: 2, 2: 5, 5: 10}


@dataclass(frozen=True)
class EpisodeConfig:
    objective: RemovalStrategy
    budget_L: int
    n_sims: int | None = None  # None: 2 * |V|
    reward_at_end_only: bool = True

    def __post_init__(self):
        if self.budget_L < 1:
            raise ValueError("budget_L must be at least 1")
        if not self.reward_at_end_only:
            raise ValueError("only terminal rewards are supported")


@dataclass(frozen=True)
class EnvState:
    graph: Graph
    edge_stub: int | None
    t: int
    f_initial: float
    terminal: bool = False

    def __post_init__(self):
        if (self.edge_stub is not None) != (self.t % 2 == 1):
            raise ValueError("edge stub must be set exactly on odd steps")


@dataclass(frozen=True)
class StepOutcome:
    next_state: EnvState
    reward: float
    terminal: bool


def tau_to_budget(tau: float, n: int) -> int:
    """Edge budget for ``tau`` percent of all node pairs (half-up rounding)."""
    return max(1, int(math.floor(tau / 100 * n * (n - 1) / 2 + 0.5)))


def scale_budget(budget: int, n_base: int, n: int, mode: str = "pairs") -> int:
    """Carry a budget from ``n_base`` nodes to ``n`` nodes.

    ``"pairs"`` keeps the fraction of node pairs fixed; ``"nodes"`` scales
    linearly with the node count.
    """
    if mode == "pairs":
        ratio = n * (n - 1) / (n_base * (n_base - 1))
    elif mode == "nodes":
        ratio = n / n_base
    else:
        raise ValueError(f"unknown scaling mode {mode!r}")
    return max(1, int(math.floor(budget * ratio + 0.5)))


def estimate_objective(g: Graph, cfg: EpisodeConfig, rng) -> float:
    return estimate_robustness(g, cfg.objective, cfg.n_sims, rng).mean


def reset(g0: Graph, cfg: EpisodeConfig, rng=None, f_initial: float | None = None) -> EnvState:
    if not g0.is_connected():
        raise DisconnectedGraphError("episodes start from a connected graph")
    if cfg.budget_L > len(g0.non_edges()):
        raise ValueError(f"budget {cfg.budget_L} exceeds the number of absent edges")
    if f_initial is None:
        f_initial = estimate_objective(g0, cfg, as_rng(rng))
    return EnvState(graph=g0, edge_stub=None, t=0, f_initial=f_initial)


def valid_actions(s: EnvState) -> list[int]:
    if s.terminal:
        raise TerminalStateError("no actions in a terminal state")
    g = s.graph
    if s.edge_stub is None:
        full = g.num_live - 1
        return [v for v in g.live_nodes() if g.degree(v) < full]
    sigma = s.edge_stub
    return [v for v in g.live_nodes() if v != sigma and not g.has_edge(sigma, v)]


def step(s: EnvState, a: int, cfg: EpisodeConfig, rng=None) -> StepOutcome:
    if s.terminal:
        raise TerminalStateError("episode already finished")
    if a not in valid_actions(s):
        raise InvalidActionError(f"node {a} is not a valid action at t={s.t}")
    t = s.t + 1
    if s.edge_stub is None:
        nxt = replace(s, edge_stub=a, t=t)
        return StepOutcome(nxt, 0.0, False)
    g = s.graph.add_edge(s.edge_stub, a)
    # a complete graph cannot take another edge, so the episode stops early
    done = t >= 2 * cfg.budget_L or g.is_complete()
    reward = estimate_objective(g, cfg, as_rng(rng)) - s.f_initial if done else 0.0
    nxt = EnvState(graph=g, edge_stub=None, t=t, f_initial=s.f_initial, terminal=done)
    return StepOutcome(nxt, reward, done)


Policy = Callable[[EnvState, list], int]


@dataclass
class Episode:
    graph: Graph
    reward: float
    log: list[tuple[int, int | None, int, float]] = field(default_factory=list)

    @property
    def added_edges(self) -> list[tuple[int, int]]:
        return [(stub, a) for _, stub, a, _ in self.log if stub is not None]

    def format_log(self) -> str:
        lines = ["step\tstub\taction\treward"]
        for t, stub, a, r in self.log:
            lines.append(f"{t}\t{'-' if stub is None else stub}\t{a}\t{r!r}")
        return "\n".join(lines) + "\n"


def run_episode(
    g0: Graph,
    policy: Policy,
    cfg: EpisodeConfig,
    rng=None,
    f_initial: float | None = None,
) -> Episode:
    rng = as_rng(rng)
    s = reset(g0, cfg, rng, f_initial)
    ep = Episode(graph=g0, reward=0.0)
    while True:
        actions = valid_actions(s)
        a = policy(s, actions)
        out = step(s, a, cfg, rng)
        ep.log.append((s.t, s.edge_stub, a, out.reward))
        ep.reward += out.reward
        s = out.next_state
        if out.terminal:
            break
    ep.graph = s.graph
    return ep


def random_policy(rng) -> Policy:
    """Uniformly random valid action at every selection."""
    rng = as_rng(rng)

    def act(state: EnvState, actions: list) -> int:
        return actions[int(rng.integers(len(actions)))]

    return act


def first_action_policy(state: EnvState, actions: list) -> int:
    return actions[0]
