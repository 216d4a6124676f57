"""Monte Carlo estimation of the expected critical fraction.

The critical fraction of a removal order is ``j / N`` where ``j`` is the first
(1-based) removal after which the surviving nodes form more than one connected
component. Orders that never disconnect the graph (complete graphs, for
instance) count as 1.0.

Two evaluation paths exist. :func:`critical_fraction` follows the removal
procedure literally: delete a node, recount components, repeat.
:func:`critical_fractions` is the fast batch kernel used for estimation; it
adds the nodes back in reverse order with a union-find, which yields the
component count of every suffix of the permutation in a single pass.
"""
from __future__ import annotations

import enum
import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

# TBB shipped with this numba build is too old; avoid the probe and its warning
numba.config.THREADING_LAYER = "workqueue"

from .errors import DisconnectedGraphError, GraphError, TooLargeError
from .graph import Graph

EXACT_MAX_NODES = 8
REAL_WORLD_N_SIMS = 40


class RemovalKind(enum.Enum):
    RANDOM = "random"
    TARGETED = "targeted"


class TieBreak(enum.Enum):
    UNIFORM_RANDOM = "uniform"
    DESCENDING_LABEL = "label"


@dataclass(frozen=True)
class RemovalStrategy:
    kind: RemovalKind
    tie_break: TieBreak = TieBreak.UNIFORM_RANDOM

    @classmethod
    def parse(cls, name: str, tie_break: str = "uniform") -> "RemovalStrategy":
        return cls(RemovalKind(name), TieBreak(tie_break))

    def __str__(self) -> str:
        if self.kind is RemovalKind.RANDOM:
            return "random"
        return f"targeted[{self.tie_break.value}]"


RANDOM = RemovalStrategy(RemovalKind.RANDOM)
TARGETED = RemovalStrategy(RemovalKind.TARGETED)


@dataclass(frozen=True)
class RobustnessEstimate:
    mean: float
    std_error: float
    n_sims: int

    def to_csv(self) -> str:
        return f"{self.mean!r},{self.std_error!r},{self.n_sims}"


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def default_n_sims(g: Graph, real_world: bool = False) -> int:
    return REAL_WORLD_N_SIMS if real_world else 2 * g.num_live


def _compact(g: Graph) -> tuple[Graph, np.ndarray]:
    """Live subgraph relabeled to 0..n-1, plus the original labels."""
    live = g.live_nodes()
    if len(live) == g.num_nodes:
        return g, np.arange(g.num_nodes)
    return g.subgraph(live), np.asarray(live, dtype=np.int64)


def _require_connected(g: Graph) -> None:
    if g.num_live == 0 or not g.is_connected():
        raise DisconnectedGraphError("robustness is only defined for connected graphs")


def generate_permutations(
    g: Graph, strategy: RemovalStrategy, n: int, rng: np.random.Generator | int | None
) -> np.ndarray:
    """``(n, num_live)`` array; row ``i`` is the removal order of simulation ``i``.

    Row ``i`` depends only on the ``i``-th block of draws from ``rng``, so
    splitting the rows across workers cannot change any simulation.
    """
    rng = as_rng(rng)
    live = np.asarray(g.live_nodes(), dtype=np.int64)
    k = len(live)
    if strategy.kind is RemovalKind.RANDOM:
        keys = rng.random((n, k))
    else:
        deg = g.degrees()[live].astype(np.float64)
        if strategy.tie_break is TieBreak.UNIFORM_RANDOM:
            # integer degrees dominate; the uniform part only orders ties
            keys = -deg[None, :] + rng.random((n, k))
        else:
            keys = np.broadcast_to(-deg * (k + 1) - live / (live.max(initial=0) + 1), (n, k))
    return live[np.argsort(keys, axis=1, kind="stable")]


def generate_permutation(
    g: Graph, strategy: RemovalStrategy, rng: np.random.Generator | int | None = None
) -> np.ndarray:
    return generate_permutations(g, strategy, 1, rng)[0]


def critical_fraction(g: Graph, perm) -> float:
    """Critical fraction of one removal order, by literal node deletion."""
    _require_connected(g)
    h = g.copy()
    n = h.num_live
    perm = [int(v) for v in perm]
    if sorted(perm) != h.live_nodes():
        raise GraphError("permutation must cover every live node exactly once")
    for j, v in enumerate(perm, start=1):
        h.remove_node_inplace(v)
        if h.num_connected_components() > 1:
            return j / n
    return 1.0


@numba.njit(cache=True, parallel=True)
def _critical_fraction_kernel(indptr, indices, perms, out):
    n_sims, n = perms.shape
    for s in numba.prange(n_sims):
        parent = np.empty(n, np.int64)
        present = np.zeros(n, np.bool_)
        comps = 0
        crit = 0
        # after adding perms[s, k], the present set is what survives k removals
        for k in range(n - 1, 0, -1):
            v = perms[s, k]
            present[v] = True
            parent[v] = v
            comps += 1
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if not present[u]:
                    continue
                ru = u
                while parent[ru] != ru:
                    parent[ru] = parent[parent[ru]]
                    ru = parent[ru]
                rv = v
                while parent[rv] != rv:
                    parent[rv] = parent[parent[rv]]
                    rv = parent[rv]
                if ru != rv:
                    parent[ru] = rv
                    comps -= 1
            if comps > 1:
                crit = k
        out[s] = crit / n if crit > 0 else 1.0


def _set_workers(workers: int | None) -> None:
    if workers is None:
        workers = int(os.environ.get("ROBUSTGRAPH_WORKERS", "0")) or None
    if workers is not None:
        numba.set_num_threads(max(1, min(workers, numba.config.NUMBA_NUM_THREADS)))


def critical_fractions(g: Graph, perms: np.ndarray, workers: int | None = None) -> np.ndarray:
    """Critical fraction of each row of ``perms`` (fast path, no connectivity check)."""
    h, live = _compact(g)
    perms = np.asarray(perms, dtype=np.int64)
    if perms.ndim == 1:
        perms = perms[None, :]
    if len(live) != h.num_nodes or h is not g:
        index = np.full(g.num_nodes, -1, dtype=np.int64)
        index[live] = np.arange(len(live))
        perms = index[perms]
    indptr, indices = h.to_csr()
    out = np.empty(perms.shape[0], dtype=np.float64)
    if perms.shape[1] == 0:
        out[:] = 1.0
        return out
    _set_workers(workers)
    _critical_fraction_kernel(indptr, indices, np.ascontiguousarray(perms), out)
    return out


def estimate_robustness(
    g: Graph,
    strategy: RemovalStrategy,
    n_sims: int | None = None,
    rng: np.random.Generator | int | None = None,
    workers: int | None = None,
) -> RobustnessEstimate:
    _require_connected(g)
    if n_sims is None:
        n_sims = default_n_sims(g)
    if n_sims < 1:
        raise ValueError("n_sims must be at least 1")
    perms = generate_permutations(g, strategy, n_sims, rng)
    r = critical_fractions(g, perms, workers)
    if r.min() == r.max():
        # constant samples (e.g. every run equal to 1/5) are reported exactly
        return RobustnessEstimate(mean=float(r[0]), std_error=0.0, n_sims=n_sims)
    mean = math.fsum(r) / n_sims
    if n_sims > 1:
        se = math.sqrt(math.fsum((r - mean) ** 2) / (n_sims - 1) / n_sims)
    else:
        se = 0.0
    return RobustnessEstimate(mean=mean, std_error=se, n_sims=n_sims)


def objective_value(
    g: Graph, strategy: RemovalStrategy, n_sims: int | None, rng
) -> float:
    return estimate_robustness(g, strategy, n_sims, rng).mean


# -- exhaustive oracle -----------------------------------------------------

def consistent_orders(g: Graph, strategy: RemovalStrategy):
    """Every removal order the strategy can produce, each equally likely."""
    live = g.live_nodes()
    if strategy.kind is RemovalKind.RANDOM:
        yield from itertools.permutations(live)
        return
    deg = {v: g.degree(v) for v in live}
    if strategy.tie_break is TieBreak.DESCENDING_LABEL:
        yield tuple(sorted(live, key=lambda v: (-deg[v], -v)))
        return
    groups = [
        [v for v in live if deg[v] == d] for d in sorted(set(deg.values()), reverse=True)
    ]
    for parts in itertools.product(*(itertools.permutations(grp) for grp in groups)):
        yield tuple(itertools.chain.from_iterable(parts))


def exact_robustness(g: Graph, strategy: RemovalStrategy) -> float:
    """Exact expected critical fraction by enumerating removal orders (N <= 8)."""
    _require_connected(g)
    n = g.num_live
    if n > EXACT_MAX_NODES:
        raise TooLargeError(f"exact enumeration limited to {EXACT_MAX_NODES} nodes, got {n}")
    split_cache: dict[frozenset, bool] = {}

    def disconnected(removed: frozenset) -> bool:
        hit = split_cache.get(removed)
        if hit is None:
            h = g.copy()
            for v in removed:
                h.remove_node_inplace(v)
            hit = split_cache[removed] = h.num_connected_components() > 1
        return hit

    # rational arithmetic so values like 1/5 come out correctly rounded
    total = Fraction(0)
    count = 0
    for order in consistent_orders(g, strategy):
        value = Fraction(1)
        for j in range(1, n + 1):
            if disconnected(frozenset(order[:j])):
                value = Fraction(j, n)
                break
        total += value
        count += 1
    return float(total / count)
