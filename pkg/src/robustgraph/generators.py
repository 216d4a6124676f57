"""Synthetic graph families and real-world edge-list preparation."""
from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import GraphError, ParseError, SizeOutOfRangeError
from .graph import Graph, parse_edge_lines, write_edge_list

ER_MAX_ATTEMPTS = 100_000


class Family(enum.Enum):
    ER = "er"
    BA = "ba"


@dataclass(frozen=True)
class GeneratorSpec:
    family: Family
    n: int
    er_edge_fraction: float = 0.20
    ba_m: int = 2
    seed: int | None = None

    @property
    def er_num_edges(self) -> int:
        return int(math.floor(self.er_edge_fraction * self.n * (self.n - 1) / 2 + 0.5))


def _pair_from_index(idx: int, n: int) -> tuple[int, int]:
    # row-major enumeration of the strict upper triangle
    u = 0
    while idx >= n - 1 - u:
        idx -= n - 1 - u
        u += 1
    return u, u + 1 + idx


def generate_er_connected(spec: GeneratorSpec, rng: np.random.Generator | None = None) -> Graph:
    """Uniform graph on ``spec.n`` nodes with exactly ``m`` edges, resampled until connected."""
    n, m = spec.n, spec.er_num_edges
    if m < n - 1:
        raise GraphError(f"{m} edges cannot connect {n} nodes")
    total = n * (n - 1) // 2
    if m > total:
        raise GraphError(f"{m} edges exceed the {total} available pairs")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    pairs = [_pair_from_index(i, n) for i in range(total)]
    for _ in range(ER_MAX_ATTEMPTS):
        chosen = rng.choice(total, size=m, replace=False)
        g = Graph(n, (pairs[i] for i in np.sort(chosen)))
        if g.is_connected():
            return g
    raise RuntimeError(f"no connected ER graph after {ER_MAX_ATTEMPTS} attempts")


def generate_ba(spec: GeneratorSpec, rng: np.random.Generator | None = None) -> Graph:
    """Preferential attachment grown from a clique on the first ``M`` nodes."""
    n, M = spec.n, spec.ba_m
    if not 1 <= M < n:
        raise GraphError(f"need 1 <= M < n, got M={M}, n={n}")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    g = Graph(n, ((i, j) for i in range(M) for j in range(i + 1, M)))
    deg = np.zeros(n, dtype=np.float64)
    deg[:M] = M - 1
    for v in range(M, n):
        weights = deg[:v].copy()
        targets = []
        for _ in range(M):
            if weights.sum() <= 0:
                # degree-zero seed (M == 1): attach uniformly
                weights = np.where(np.isin(np.arange(v), targets), 0.0, 1.0)
            u = int(rng.choice(v, p=weights / weights.sum()))
            targets.append(u)
            weights[u] = 0.0
        for u in targets:
            g.add_edge_inplace(v, u)
            deg[u] += 1
        deg[v] = M
    return g


def generate(spec: GeneratorSpec, rng: np.random.Generator | None = None) -> Graph:
    if spec.family is Family.ER:
        return generate_er_connected(spec, rng)
    return generate_ba(spec, rng)


def graph_seed(master: int, *path: int) -> int:
    """Deterministic per-graph seed derived from a master seed and an index path."""
    return int(np.random.SeedSequence([master, *path]).generate_state(1, np.uint64)[0])


def generate_many(spec: GeneratorSpec, count: int, master_seed: int, stream: int = 0) -> list[Graph]:
    return [
        generate(replace(spec, seed=graph_seed(master_seed, stream, i))) for i in range(count)
    ]


@dataclass
class DatasetSplit:
    train: list[Graph]
    validate: list[Graph]
    test: list[Graph]


def make_split(
    spec: GeneratorSpec, n_train: int, n_validate: int, n_test: int, master_seed: int
) -> DatasetSplit:
    """Disjoint train/validate/test sets; a graph repeated from an earlier set is redrawn."""
    seen: set = set()
    out = []
    for stream, count in enumerate((n_train, n_validate, n_test)):
        graphs: list[Graph] = []
        draw = 0
        while len(graphs) < count:
            g = generate(replace(spec, seed=graph_seed(master_seed, stream, draw)))
            draw += 1
            k = g.key()
            if k in seen and stream > 0:
                continue
            seen.add(k)
            graphs.append(g)
        out.append(graphs)
    return DatasetSplit(*out)


def write_dataset(
    spec: GeneratorSpec, count: int, master_seed: int, outdir: str | os.PathLike
) -> Path:
    """Write ``count`` graphs as edge lists plus ``manifest.csv``; returns the manifest path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = outdir / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["filename", "n", "m", "seed"])
        for i in range(count):
            seed = graph_seed(master_seed, 0, i)
            g = generate(replace(spec, seed=seed))
            name = f"{spec.family.value}_{spec.n}_{i:05d}.edges"
            write_edge_list(g, outdir / name)
            w.writerow([name, g.num_nodes, g.num_edges, seed])
    return manifest


# -- real-world edge lists -------------------------------------------------

def prepare_edges(edges: list[tuple[int, int]]) -> tuple[Graph, list[int]]:
    """Largest connected component of a raw edge list.

    Labels are relabeled ``0..k-1`` in order of first appearance. Self-loops and
    repeated edges in the input are dropped. Returns the graph and the source
    label of every new node.
    """
    order: dict[int, int] = {}
    for a, b in edges:
        order.setdefault(a, len(order))
        order.setdefault(b, len(order))
    g = Graph(len(order))
    for a, b in edges:
        u, v = order[a], order[b]
        if u != v and not g.has_edge(u, v):
            g.add_edge_inplace(u, v)
    comps = g.components()
    if not comps:
        return Graph(0), []
    # ties go to the component seen first in the file
    best = max(comps, key=lambda c: (len(c), -c[0]))
    source = list(order)
    return g.subgraph(best), [source[v] for v in best]


def load_and_prepare(
    path: str | os.PathLike,
    min_n: int = 20,
    max_n: int = 50,
    mapping_path: str | os.PathLike | None = None,
) -> Graph:
    with open(path) as fh:
        edges, _ = parse_edge_lines(fh)
    if not edges:
        raise ParseError(f"{path}: no edges")
    g, labels = prepare_edges(edges)
    if not min_n <= g.num_nodes <= max_n:
        raise SizeOutOfRangeError(
            f"largest component has {g.num_nodes} nodes, outside [{min_n}, {max_n}]"
        )
    if mapping_path is not None:
        with open(mapping_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "source_label"])
            w.writerows(enumerate(labels))
    return g
