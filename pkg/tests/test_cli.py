import csv

import pytest

from robustgraph import checkpoint
from robustgraph.cli import main
from robustgraph.graph import path_graph, read_edge_list, star_graph, write_edge_list


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_estimate(tmp_path, capsys):
    p = tmp_path / "s.edges"
    write_edge_list(star_graph(5), p)
    code, out, _ = run(capsys, "estimate", "--input", p, "--strategy", "targeted", "--n-sims", 30, "--seed", 1)
    assert code == 0 and out.strip() == "0.2,0.0,30"
    code, out, _ = run(capsys, "estimate", "--input", p, "--strategy", "random", "--seed", 1, "--workers", 1)
    mean, se, n = out.strip().split(",")
    assert n == "10" and 0 <= float(mean) <= 1


def test_estimate_reports_errors(tmp_path, capsys):
    p = tmp_path / "bad.edges"
    p.write_text("0 1 2\n")
    code, _, err = run(capsys, "estimate", "--input", p)
    assert code == 1 and "line 1" in err


def test_generate(tmp_path, capsys):
    code, _, _ = run(capsys, "generate", "--family", "er", "--n", 12, "--count", 3, "--seed", 4, "--out", tmp_path)
    rows = list(csv.DictReader(open(tmp_path / "manifest.csv")))
    assert code == 0 and len(rows) == 3
    assert read_edge_list(tmp_path / rows[0]["filename"]).num_edges == int(rows[0]["m"]) == 13


def test_baseline_output(tmp_path, capsys):
    code, out, _ = run(capsys, "baseline", "--strategy", "ldp", "--objective", "random",
                       "--n", 12, "--count", 4, "--L", 1, "--seed", 2)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "graph_id,reward"
    assert [l.split(",")[0] for l in lines[1:]] == ["0", "1", "2", "3", "mean", "std"]
    rewards = [float(l.split(",")[1]) for l in lines[1:5]]
    assert float(lines[5].split(",")[1]) == pytest.approx(sum(rewards) / 4)


def test_train_evaluate_round_trip(tmp_path, capsys):
    ck, log = tmp_path / "m.bin", tmp_path / "log.csv"
    code, out, _ = run(capsys, "train", "--objective", "targeted", "--n", 10, "--n-train", 6, "--n-validate", 2,
                       "--L", 1, "--n-sims", 8, "--embed-dim", 4, "--hidden", 4, "--rounds", 2,
                       "--total-steps", 20, "--batch-size", 4, "--validation-every", 10,
                       "--checkpoint", ck, "--log", log, "--seed", 3)
    assert code == 0 and out.startswith("best_step,")
    rows = list(csv.DictReader(open(log)))
    assert list(rows[0]) == ["step", "loss", "epsilon", "validation"]
    assert [r["step"] for r in rows] == ["0", "10", "20"]
    params, cfg, adam, kind = checkpoint.load(ck)
    assert cfg.embed_dim == 4 and adam is not None and kind == checkpoint.KIND_Q
    out_csv = tmp_path / "eval.csv"
    code, _, _ = run(capsys, "evaluate", "--checkpoint", ck, "--objective", "targeted",
                     "--n", 10, "--count", 3, "--L", 1, "--seed", 1, "--out", out_csv)
    assert code == 0 and len(list(csv.reader(open(out_csv)))) == 1 + 3 + 2


def test_train_sl(tmp_path, capsys):
    ck = tmp_path / "sl.bin"
    code, _, _ = run(capsys, "train", "--agent", "sl", "--n", 10, "--n-train", 6, "--n-validate", 2,
                     "--L", 1, "--n-sims", 8, "--embed-dim", 4, "--hidden", 4, "--rounds", 1,
                     "--total-steps", 10, "--batch-size", 3, "--checkpoint", ck)
    assert code == 0 and checkpoint.load(ck)[3] == checkpoint.KIND_REGRESSOR


def test_dot(tmp_path, capsys):
    src, dst = tmp_path / "p.edges", tmp_path / "p.dot"
    write_edge_list(path_graph(3), src)
    assert run(capsys, "dot", "--input", src, "--out", dst)[0] == 0
    assert dst.read_text().startswith("graph G {")


def test_table_and_curve_commands(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "objectives: [random]\nfamilies: [er]\nbudgets: [1]\nagents: [random, fv]\n"
        "n: 10\nn_seeds: 1\nn_train: 4\nn_validate: 2\nn_test: 3\nn_sims: 6\n"
        "net: {embed_dim: 4, hidden: 4, rounds: 1}\n"
        "schedule: {total_steps: 10, batch_size: 4, validation_every: 5}\nsizes: [10, 12]\n"
    )
    assert run(capsys, "table", "--config", cfg, "--out", tmp_path / "t")[0] == 0
    assert (tmp_path / "t" / "summary.csv").exists()
    assert run(capsys, "curve", "--config", cfg, "--out", tmp_path / "c")[0] == 0
    assert len((tmp_path / "c" / "curve.csv").read_text().splitlines()) == 1 + 3
    assert run(capsys, "sweep", "--config", cfg, "--out", tmp_path / "s")[0] == 0
    assert len((tmp_path / "s" / "sweep.csv").read_text().splitlines()) == 1 + 4
