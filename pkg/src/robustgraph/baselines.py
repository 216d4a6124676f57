"""Non-learned edge-addition strategies.

Each selector maps a graph to the next edge to add. Ties are always resolved
towards the lexicographically smallest canonical pair; for the spectral
scores, values within ``SCORE_TIE_TOL`` of the best count as tied so that
round-off cannot change the choice.
"""
from __future__ import annotations

import enum
from typing import Callable

import numpy as np

from .env import Episode, EnvState, EpisodeConfig, Policy, random_policy, run_episode
from .errors import CompleteGraphError
from .graph import Graph, NodePair
from .robustness import RemovalStrategy, as_rng, estimate_robustness
from .spectral import effective_resistance, fiedler_vector

SCORE_TIE_TOL = 1e-9


class BaselineKind(enum.Enum):
    RANDOM = "random"
    GREEDY = "greedy"
    LDP = "ldp"
    FV = "fv"
    ERES = "eres"


def _candidates(g: Graph) -> list[NodePair]:
    cands = g.non_edges()
    if not cands:
        raise CompleteGraphError("graph is complete; no edge can be added")
    return cands


def _argmax_pair(cands: list[NodePair], scores: np.ndarray, tol: float = SCORE_TIE_TOL) -> NodePair:
    best = scores.max()
    # candidates are already in lexicographic order
    return cands[int(np.flatnonzero(scores >= best - tol)[0])]


def select_edge_random(g: Graph, rng) -> NodePair:
    cands = _candidates(g)
    return cands[int(as_rng(rng).integers(len(cands)))]


def select_edge_ldp(g: Graph) -> NodePair:
    cands = _candidates(g)
    deg = g.degrees()
    products = np.array([deg[u] * deg[v] for u, v in cands])
    return cands[int(np.argmin(products))]


def select_edge_fv(g: Graph) -> NodePair:
    cands = _candidates(g)
    y = fiedler_vector(g)
    idx = np.array(cands)
    return _argmax_pair(cands, np.abs(y[idx[:, 0]] - y[idx[:, 1]]))


def select_edge_eres(g: Graph) -> NodePair:
    cands = _candidates(g)
    omega = effective_resistance(g)
    idx = np.array(cands)
    return _argmax_pair(cands, omega[idx[:, 0], idx[:, 1]])


def select_edge_greedy(
    g: Graph,
    objective: RemovalStrategy,
    n_sims: int | None = None,
    rng=None,
    evaluate: Callable[[Graph], float] | None = None,
) -> NodePair:
    """One-step lookahead: the non-edge whose addition scores highest.

    ``evaluate`` replaces the Monte Carlo estimate, e.g. with the exact oracle.
    Otherwise each candidate gets its own independent seed.
    """
    cands = _candidates(g)
    if evaluate is None:
        rng = as_rng(rng)
        seeds = rng.integers(0, 2**63, size=len(cands))

        def score(i: int, h: Graph) -> float:
            return estimate_robustness(h, objective, n_sims, np.random.default_rng(seeds[i])).mean

    else:

        def score(i: int, h: Graph) -> float:
            return evaluate(h)

    values = np.array([score(i, g.add_edge(u, v)) for i, (u, v) in enumerate(cands)])
    return _argmax_pair(cands, values, tol=0.0)


class EdgeSelectorPolicy:
    """Drive the two-phase MDP with an edge selector.

    The selector is consulted when no stub is set; the pair's smaller endpoint
    is emitted first and the other on the following step.
    """

    def __init__(self, selector: Callable[[Graph], NodePair]):
        self.selector = selector
        self._pending: NodePair | None = None

    def __call__(self, state: EnvState, actions: list) -> int:
        if state.edge_stub is None:
            self._pending = self.selector(state.graph)
            return self._pending.u
        pair, self._pending = self._pending, None
        if pair is None or pair.u != state.edge_stub:
            raise RuntimeError("edge selector policy lost track of its pending edge")
        return pair.v


def baseline_policy(
    kind: BaselineKind, cfg: EpisodeConfig, rng=None, greedy_n_sims: int | None = None
) -> Policy:
    rng = as_rng(rng)
    if kind is BaselineKind.RANDOM:
        return random_policy(rng)
    if kind is BaselineKind.LDP:
        return EdgeSelectorPolicy(select_edge_ldp)
    if kind is BaselineKind.FV:
        return EdgeSelectorPolicy(select_edge_fv)
    if kind is BaselineKind.ERES:
        return EdgeSelectorPolicy(select_edge_eres)
    n_sims = greedy_n_sims if greedy_n_sims is not None else cfg.n_sims
    return EdgeSelectorPolicy(lambda g: select_edge_greedy(g, cfg.objective, n_sims, rng))


def run_baseline(
    g0: Graph,
    kind: BaselineKind,
    cfg: EpisodeConfig,
    rng=None,
    greedy_n_sims: int | None = None,
) -> Episode:
    rng = as_rng(rng)
    policy_rng = np.random.default_rng(rng.integers(0, 2**63))
    policy = baseline_policy(kind, cfg, policy_rng, greedy_n_sims)
    return run_episode(g0, policy, cfg, rng)
