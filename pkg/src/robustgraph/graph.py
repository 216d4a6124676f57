"""Labeled undirected simple graphs with logical node removal.

Nodes are the integers ``0..N-1``. Removing a node only masks it out, so the
labels of the surviving nodes never change. This matters for the removal
simulations, which walk a fixed permutation of the original labels.
"""
from __future__ import annotations

import os
from bisect import bisect_left, insort
from collections import deque
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import (
    DuplicateEdgeError,
    GraphError,
    MissingEdgeError,
    NodeRemovedError,
    ParseError,
    SelfLoopError,
)


class NodePair(NamedTuple):
    """An unordered node pair stored with ``u < v``."""

    u: int
    v: int

    @classmethod
    def of(cls, a: int, b: int) -> "NodePair":
        a, b = int(a), int(b)
        if a == b:
            raise SelfLoopError(f"self-loop on node {a}")
        return cls(a, b) if a < b else cls(b, a)


def canonical(a: int, b: int) -> NodePair:
    return NodePair.of(a, b)


class Graph:
    __slots__ = ("_adj", "_alive", "_m", "_edges_cache")

    def __init__(self, num_nodes: int, edges: Iterable[tuple[int, int]] = ()):
        if num_nodes < 0:
            raise GraphError("num_nodes must be non-negative")
        self._adj: list[list[int]] = [[] for _ in range(num_nodes)]
        self._alive = [True] * num_nodes
        self._m = 0
        self._edges_cache = None
        for a, b in edges:
            self.add_edge_inplace(a, b)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_adjacency(cls, adj: list[list[int]]) -> "Graph":
        """Build from neighbor lists; symmetry is checked."""
        g = cls(len(adj))
        for v, nbrs in enumerate(adj):
            for u in nbrs:
                if u > v:
                    g.add_edge_inplace(v, u)
        for v, nbrs in enumerate(adj):
            if sorted(set(nbrs)) != g._adj[v]:
                raise GraphError(f"adjacency of node {v} is not symmetric or has duplicates")
        return g

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g._adj = [list(n) for n in self._adj]
        g._alive = list(self._alive)
        g._m = self._m
        g._edges_cache = self._edges_cache
        return g

    # -- basic queries ----------------------------------------------------

    @property
    def num_nodes(self) -> int:
        """Number of node labels, including removed ones."""
        return len(self._adj)

    @property
    def num_live(self) -> int:
        return sum(self._alive)

    @property
    def num_edges(self) -> int:
        return self._m

    def is_alive(self, v: int) -> bool:
        return self._alive[v]

    def live_nodes(self) -> list[int]:
        return [v for v, a in enumerate(self._alive) if a]

    def neighbors(self, v: int) -> list[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(n) for n in self._adj), dtype=np.int64, count=len(self._adj))

    def has_edge(self, a: int, b: int) -> bool:
        nbrs = self._adj[a]
        i = bisect_left(nbrs, b)
        return i < len(nbrs) and nbrs[i] == b

    def edges(self) -> list[NodePair]:
        return [NodePair(v, u) for v, nbrs in enumerate(self._adj) for u in nbrs if u > v]

    def non_edges(self) -> list[NodePair]:
        """All absent pairs among live nodes, in lexicographic order."""
        live = self.live_nodes()
        out = []
        for i, v in enumerate(live):
            nbrs = self._adj[v]
            for u in live[i + 1:]:
                j = bisect_left(nbrs, u)
                if j == len(nbrs) or nbrs[j] != u:
                    out.append(NodePair(v, u))
        return out

    def is_complete(self) -> bool:
        n = self.num_live
        return self._m == n * (n - 1) // 2

    # -- mutation ---------------------------------------------------------

    def _check_node(self, v: int) -> None:
        if not 0 <= v < len(self._adj):
            raise GraphError(f"node {v} out of range")
        if not self._alive[v]:
            raise NodeRemovedError(f"node {v} has been removed")

    def add_edge_inplace(self, a: int, b: int) -> None:
        u, v = NodePair.of(a, b)
        self._check_node(u)
        self._check_node(v)
        if self.has_edge(u, v):
            raise DuplicateEdgeError(f"edge ({u}, {v}) already present")
        insort(self._adj[u], v)
        insort(self._adj[v], u)
        self._m += 1
        self._edges_cache = None

    def add_edge(self, a: int, b: int) -> "Graph":
        """Return a copy with the edge added; ``self`` is left untouched."""
        g = self.copy()
        g.add_edge_inplace(a, b)
        return g

    def remove_edge_inplace(self, a: int, b: int) -> None:
        u, v = NodePair.of(a, b)
        if not self.has_edge(u, v):
            raise MissingEdgeError(f"edge ({u}, {v}) not present")
        self._adj[u].remove(v)
        self._adj[v].remove(u)
        self._m -= 1
        self._edges_cache = None

    def remove_node_inplace(self, v: int) -> None:
        self._check_node(v)
        for u in self._adj[v]:
            self._adj[u].remove(v)
        self._m -= len(self._adj[v])
        self._adj[v] = []
        self._alive[v] = False
        self._edges_cache = None

    def remove_node(self, v: int) -> "Graph":
        g = self.copy()
        g.remove_node_inplace(v)
        return g

    # -- connectivity -----------------------------------------------------

    def components(self) -> list[list[int]]:
        """Connected components over live nodes, each sorted, ordered by smallest member."""
        seen = [not a for a in self._alive]
        comps = []
        for s in range(len(self._adj)):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self._adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def num_connected_components(self) -> int:
        return len(self.components())

    def is_connected(self) -> bool:
        return self.num_connected_components() == 1

    # -- conversion -------------------------------------------------------

    def relabel(self, mapping: list[int] | np.ndarray) -> "Graph":
        """Apply ``v -> mapping[v]``; ``mapping`` must be a permutation of the labels."""
        n = len(self._adj)
        if sorted(int(x) for x in mapping) != list(range(n)):
            raise GraphError("mapping is not a permutation")
        g = Graph(n, ((mapping[u], mapping[v]) for u, v in self.edges()))
        for v in range(n):
            if not self._alive[v]:
                g._alive[int(mapping[v])] = False
        return g

    def subgraph(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph relabeled to ``0..k-1`` in the given node order."""
        nodes = list(nodes)
        index = {v: i for i, v in enumerate(nodes)}
        g = Graph(len(nodes))
        for v in nodes:
            for u in self._adj[v]:
                if u in index and index[u] > index[v]:
                    g.add_edge_inplace(index[v], index[u])
        return g

    def to_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` arrays of the adjacency lists."""
        indptr = np.zeros(len(self._adj) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(n) for n in self._adj])
        indices = np.fromiter(
            (u for nbrs in self._adj for u in nbrs), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` int array, canonical and sorted. Treat as read-only."""
        if self._edges_cache is None:
            e = self.edges()
            self._edges_cache = np.array(e, dtype=np.int64).reshape(len(e), 2)
        return self._edges_cache

    def key(self) -> tuple:
        return (tuple(self._alive), tuple(self.edges()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._alive == other._alive and self._adj == other._adj

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"

    def __iter__(self) -> Iterator[int]:
        return iter(self.live_nodes())


# -- small named graphs used throughout tests and examples -----------------

def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> Graph:
    """Star on ``n`` nodes with center 0."""
    return Graph(n, ((0, i) for i in range(1, n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


# -- edge-list text format -------------------------------------------------

_NODES_HEADER = "# nodes:"


def write_edge_list(g: Graph, path: str | os.PathLike) -> None:
    """Write ``g`` as one ``u v`` line per edge.

    A ``# nodes: N`` header keeps isolated nodes across a round trip.
    """
    with open(path, "w") as fh:
        fh.write(f"{_NODES_HEADER} {g.num_nodes}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def parse_edge_lines(lines: Iterable[str]) -> tuple[list[tuple[int, int]], int | None]:
    """Parse edge-list text into raw integer pairs plus the declared node count, if any."""
    edges = []
    declared = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith(_NODES_HEADER):
                try:
                    declared = int(line[len(_NODES_HEADER):])
                except ValueError:
                    raise ParseError(f"bad node-count header {line!r}", lineno) from None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two node labels, got {len(parts)} fields: {line!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer node label in {line!r}", lineno) from None
        if a < 0 or b < 0:
            raise ParseError(f"negative node label in {line!r}", lineno)
        edges.append((a, b))
    return edges, declared


def read_edge_list(path: str | os.PathLike) -> Graph:
    """Read a file written by :func:`write_edge_list` (strict: no loops or duplicates)."""
    with open(path) as fh:
        edges, declared = parse_edge_lines(fh)
    n = max((max(e) for e in edges), default=-1) + 1
    if declared is not None:
        if declared < n:
            raise ParseError(f"header declares {declared} nodes but label {n - 1} appears")
        n = declared
    return Graph(n, edges)
