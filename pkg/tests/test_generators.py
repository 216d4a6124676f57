import csv

import numpy as np
import pytest

from robustgraph.errors import GraphError, ParseError, SizeOutOfRangeError
from robustgraph.generators import (
    Family,
    GeneratorSpec,
    generate,
    generate_ba,
    generate_er_connected,
    generate_many,
    load_and_prepare,
    make_split,
    prepare_edges,
    write_dataset,
)
from robustgraph.graph import read_edge_list


def test_er_edge_count_and_connectivity():
    spec = GeneratorSpec(Family.ER, 20)
    assert spec.er_num_edges == 38
    for seed in range(20):
        g = generate_er_connected(GeneratorSpec(Family.ER, 20, seed=seed))
        assert g.num_edges == 38 and g.is_connected()


def test_er_small_is_a_tree():
    for seed in range(30):
        g = generate(GeneratorSpec(Family.ER, 4, 0.5, seed=seed))
        assert g.num_edges == 3 and g.is_connected()


def test_er_unsatisfiable():
    with pytest.raises(GraphError):
        generate(GeneratorSpec(Family.ER, 10, 0.1, seed=0))  # 5 edges < 9


def test_er_uniform_over_labeled_trees():
    # n=4, m=3 connected graphs are the 16 labeled trees, each equally likely
    counts = {}
    for seed in range(3200):
        k = generate(GeneratorSpec(Family.ER, 4, 0.5, seed=seed)).key()
        counts[k] = counts.get(k, 0) + 1
    assert len(counts) == 16
    assert all(abs(c - 200) < 5 * np.sqrt(200) for c in counts.values())


def test_seed_determinism():
    for fam in Family:
        a = generate(GeneratorSpec(fam, 20, seed=5))
        b = generate(GeneratorSpec(fam, 20, seed=5))
        assert a == b


def test_ba_edge_count():
    for seed in range(20):
        g = generate_ba(GeneratorSpec(Family.BA, 20, seed=seed))
        assert g.num_edges == 37 and g.is_connected()
    g = generate_ba(GeneratorSpec(Family.BA, 30, ba_m=3, seed=1))
    assert g.num_edges == 3 + 27 * 3


def test_ba_m1_is_tree():
    g = generate_ba(GeneratorSpec(Family.BA, 15, ba_m=1, seed=2))
    assert g.num_edges == 14 and g.is_connected()


def test_ba_heavier_tail_than_er():
    wins = 0
    for seed in range(200):
        ba = generate(GeneratorSpec(Family.BA, 100, seed=seed))
        er = generate(GeneratorSpec(Family.ER, 100, er_edge_fraction=ba.num_edges / 4950, seed=seed))
        wins += ba.degrees().max() > er.degrees().max()
    assert wins >= 190


def test_ba_bad_m():
    with pytest.raises(GraphError):
        generate_ba(GeneratorSpec(Family.BA, 3, ba_m=3, seed=0))


def test_split_disjoint_and_sized():
    split = make_split(GeneratorSpec(Family.BA, 8), 60, 20, 20, master_seed=3)
    assert (len(split.train), len(split.validate), len(split.test)) == (60, 20, 20)
    tr = {g.key() for g in split.train}
    va = {g.key() for g in split.validate}
    te = {g.key() for g in split.test}
    assert not tr & va and not tr & te and not va & te


def test_generate_many_deterministic():
    a = generate_many(GeneratorSpec(Family.ER, 12), 5, 1, 2)
    b = generate_many(GeneratorSpec(Family.ER, 12), 5, 1, 2)
    assert a == b
    assert a != generate_many(GeneratorSpec(Family.ER, 12), 5, 1, 3)


def test_write_dataset(tmp_path):
    manifest = write_dataset(GeneratorSpec(Family.BA, 20), 3, 9, tmp_path)
    rows = list(csv.DictReader(open(manifest)))
    assert [r.keys() for r in rows][0] == {"filename", "n", "m", "seed"}
    for r in rows:
        g = read_edge_list(tmp_path / r["filename"])
        assert g.num_nodes == int(r["n"]) and g.num_edges == int(r["m"])
        assert g == generate(GeneratorSpec(Family.BA, 20, seed=int(r["seed"])))


def test_prepare_edges_lcc_and_relabel():
    big = [(100 + i, 100 + i + 1) for i in range(29)]  # 30-node path
    small = [(1, 2), (2, 3), (3, 4), (4, 5)]
    g, labels = prepare_edges(small + big + [(7, 7), (100, 101)])
    assert g.num_nodes == 30 and g.is_connected() and g.num_edges == 29
    assert labels[:3] == [100, 101, 102]


def test_load_and_prepare(tmp_path):
    p = tmp_path / "raw.txt"
    lines = [f"{i} {i + 1}" for i in range(29)] + ["50 51", "51 52", "52 53", "53 54"]
    p.write_text("\n".join(lines) + "\n")
    side = tmp_path / "map.csv"
    g = load_and_prepare(p, mapping_path=side)
    assert g.num_nodes == 30
    assert side.read_text().splitlines()[:2] == ["node,source_label", "0,0"]


def test_load_and_prepare_too_small(tmp_path):
    p = tmp_path / "raw.txt"
    p.write_text("\n".join(f"{i} {i + 1}" for i in range(9)) + "\n")
    with pytest.raises(SizeOutOfRangeError):
        load_and_prepare(p)


def test_load_and_prepare_malformed(tmp_path):
    p = tmp_path / "raw.txt"
    p.write_text("0 1\na b c\n")
    with pytest.raises(ParseError, match="line 2"):
        load_and_prepare(p)
