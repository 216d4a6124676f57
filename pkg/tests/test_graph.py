import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustgraph.errors import (
    DuplicateEdgeError,
    GraphError,
    MissingEdgeError,
    NodeRemovedError,
    ParseError,
    SelfLoopError,
)
from robustgraph.graph import (
    Graph,
    NodePair,
    complete_graph,
    cycle_graph,
    path_graph,
    read_edge_list,
    star_graph,
    write_edge_list,
)


@st.composite
def graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph(n, chosen)


def test_nodepair_canonical():
    assert NodePair.of(3, 1) == (1, 3)
    assert NodePair.of(*NodePair.of(3, 1)) == NodePair.of(3, 1)
    with pytest.raises(SelfLoopError):
        NodePair.of(2, 2)


def test_add_edge_closes_triangle():
    g = path_graph(3)
    h = g.add_edge(0, 2)
    assert h.num_edges == 3 and h.is_complete()
    assert g.num_edges == 2  # original untouched


def test_add_edge_errors():
    with pytest.raises(DuplicateEdgeError):
        complete_graph(4).add_edge(0, 3)
    with pytest.raises(SelfLoopError):
        path_graph(3).add_edge(1, 1)


def test_add_edge_two_nodes():
    g = Graph(2).add_edge(0, 1)
    assert g.num_edges == 1
    assert list(g.degrees()) == [1, 1]


def test_remove_star_center():
    g = star_graph(5).remove_node(0)
    assert g.num_live == 4 and g.num_edges == 0
    assert g.num_connected_components() == 4


def test_remove_leaf_of_path():
    g = path_graph(3).remove_node(2)
    assert g.live_nodes() == [0, 1]
    assert g.edges() == [(0, 1)]
    assert g.is_connected()


def test_remove_twice_raises():
    g = path_graph(3).remove_node(1)
    with pytest.raises(NodeRemovedError):
        g.remove_node(1)


def test_removed_node_keeps_labels():
    g = path_graph(5).remove_node(2)
    assert g.num_nodes == 5
    assert g.has_edge(3, 4) and g.components() == [[0, 1], [3, 4]]


def test_components_counts():
    assert path_graph(5).num_connected_components() == 1
    g = Graph(3)
    for v in range(3):
        g.remove_node_inplace(v)
    assert g.num_connected_components() == 0


def test_non_edges_examples():
    assert path_graph(3).non_edges() == [(0, 2)]
    assert complete_graph(4).non_edges() == []
    assert path_graph(4).non_edges() == [(0, 2), (0, 3), (1, 3)]


def test_remove_missing_edge():
    with pytest.raises(MissingEdgeError):
        path_graph(3).remove_edge_inplace(0, 2)


def test_from_adjacency_checks_symmetry():
    assert Graph.from_adjacency([[1], [0, 2], [1]]) == path_graph(3)
    with pytest.raises(GraphError):
        Graph.from_adjacency([[1], [], []])


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_invariants(g):
    assert int(g.degrees().sum()) == 2 * g.num_edges
    for v in range(g.num_nodes):
        assert g.neighbors(v) == sorted(g.neighbors(v))
        for u in g.neighbors(v):
            assert v in g.neighbors(u) and u != v
    everything = set(itertools.combinations(range(g.num_nodes), 2))
    e, ne = set(g.edges()), set(g.non_edges())
    assert not e & ne and e | ne == everything
    assert len(ne) == g.num_nodes * (g.num_nodes - 1) // 2 - g.num_edges
    assert g.non_edges() == sorted(g.non_edges())


@settings(max_examples=60, deadline=None)
@given(graphs(), st.data())
def test_add_then_remove_restores(g, data):
    ne = g.non_edges()
    if not ne:
        return
    u, v = data.draw(st.sampled_from(ne))
    h = g.add_edge(u, v)
    h.remove_edge_inplace(u, v)
    assert h == g


@settings(max_examples=60, deadline=None)
@given(graphs(), st.randoms(use_true_random=False))
def test_components_invariant_under_relabel(g, rnd):
    perm = list(range(g.num_nodes))
    rnd.shuffle(perm)
    assert g.relabel(perm).num_connected_components() == g.num_connected_components()


def test_edge_array_cache_tracks_mutation():
    g = path_graph(4)
    assert g.edge_array().tolist() == [[0, 1], [1, 2], [2, 3]]
    g.add_edge_inplace(0, 3)
    assert g.edge_array().tolist() == [[0, 1], [0, 3], [1, 2], [2, 3]]
    g.remove_node_inplace(0)
    assert g.edge_array().tolist() == [[1, 2], [2, 3]]


def test_named_graphs():
    assert cycle_graph(5).num_edges == 5
    assert star_graph(5).degree(0) == 4
    assert complete_graph(5).num_edges == 10


def test_edge_list_round_trip(tmp_path):
    g = Graph(6, [(0, 3), (1, 2), (2, 3)])  # node 4 and 5 isolated
    p = tmp_path / "g.edges"
    write_edge_list(g, p)
    h = read_edge_list(p)
    assert h == g and h.num_nodes == 6


def test_edge_list_comments_and_blanks(tmp_path):
    p = tmp_path / "g.edges"
    p.write_text("# a comment\n\n0 1\n  1 2  \n")
    assert read_edge_list(p) == path_graph(3)


@pytest.mark.parametrize(
    "text,line",
    [("0 1\n1\n", 2), ("0 x\n", 1), ("0 1\n\n-1 2\n", 3), ("0 1 2\n", 1)],
)
def test_edge_list_errors_have_line_numbers(tmp_path, text, line):
    p = tmp_path / "bad.edges"
    p.write_text(text)
    with pytest.raises(ParseError) as exc:
        read_edge_list(p)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_strict_reader_rejects_duplicates(tmp_path):
    p = tmp_path / "dup.edges"
    p.write_text("0 1\n1 0\n")
    with pytest.raises(DuplicateEdgeError):
        read_edge_list(p)


def test_equality_is_label_sensitive():
    assert path_graph(3) != Graph(3, [(0, 2), (1, 2)])
    assert hash(path_graph(3)) == hash(Graph(3, [(1, 2), (0, 1)]))
    assert np.array_equal(path_graph(3).degrees(), [1, 2, 1])
