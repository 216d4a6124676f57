"""Command-line entry point (``robustgraph <subcommand> ...``)."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import checkpoint
from .agents import TrainSchedule, evaluate_greedy, train_dqn, train_sl
from .baselines import BaselineKind
from .env import EpisodeConfig
from .errors import GraphError, ParseError
from .generators import DatasetSplit, Family, GeneratorSpec, generate_many, load_and_prepare, make_split, write_dataset
from .graph import Graph, read_edge_list
from .harness import (
    ci_halfwidth,
    eval_baseline,
    eval_sl,
    export_dot,
    fmt,
    load_config,
    run_size_sweep,
    run_table,
    run_validation_curve,
    write_csv,
    write_training_log,
)
from .neural import NetConfig
from .robustness import RemovalStrategy, estimate_robustness

TEST_STREAM = 2


def _strategy(args) -> RemovalStrategy:
    return RemovalStrategy.parse(args.objective, args.tie_break)


def _add_objective(p: argparse.ArgumentParser, flag: str = "--objective") -> None:
    p.add_argument(flag, dest="objective", choices=["random", "targeted"], default="random")
    p.add_argument("--tie-break", choices=["uniform", "label"], default="uniform")


def _add_graph_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="edge-list file (used as the only graph)")
    p.add_argument("--family", choices=["ba", "er"], default="ba")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--count", type=int, default=100)


def _read_input(path: str, prepare: bool) -> Graph:
    return load_and_prepare(path) if prepare else read_edge_list(path)


def _test_graphs(args) -> list[Graph]:
    if args.input:
        return [_read_input(args.input, getattr(args, "prepare", False))]
    return generate_many(GeneratorSpec(Family(args.family), args.n), args.count, args.seed, TEST_STREAM)


def _emit(path: str | None, header: list[str], rows: list[list]) -> None:
    if path:
        write_csv(path, header, rows)
        return
    print(",".join(header))
    for r in rows:
        print(",".join(fmt(x) if isinstance(x, float) else str(x) for x in r))


def _per_graph_rows(rewards: np.ndarray) -> list[list]:
    rows: list[list] = [[i, float(r)] for i, r in enumerate(rewards)]
    rows.append(["mean", float(np.mean(rewards))])
    rows.append(["std", float(np.std(rewards, ddof=1)) if len(rewards) > 1 else 0.0])
    return rows


# -- subcommands -------------------------------------------------------------

def cmd_generate(args) -> None:
    spec = GeneratorSpec(Family(args.family), args.n, args.er_fraction, args.ba_m)
    manifest = write_dataset(spec, args.count, args.seed, args.out)
    print(manifest)


def cmd_estimate(args) -> None:
    g = _read_input(args.input, args.prepare)
    est = estimate_robustness(g, _strategy(args), args.n_sims, np.random.default_rng(args.seed), args.workers)
    print(est.to_csv())


def cmd_baseline(args) -> None:
    cfg = EpisodeConfig(_strategy(args), args.L, args.n_sims)
    rewards = eval_baseline(BaselineKind(args.strategy), _test_graphs(args), cfg, args.seed, args.greedy_n_sims)
    _emit(args.out, ["graph_id", "reward"], _per_graph_rows(rewards))


def _schedule(args) -> TrainSchedule:
    over = {}
    for name in ("total_steps", "batch_size", "target_sync_every", "validation_every", "eps_decay_fraction", "lr"):
        val = getattr(args, name)
        if val is not None:
            over[name] = val
    if args.input and "eps_decay_fraction" not in over:
        over["eps_decay_fraction"] = 0.1
    return TrainSchedule(**over)


def _net(args) -> NetConfig:
    base = NetConfig.real_world() if args.input else NetConfig.synthetic()
    return NetConfig(
        args.embed_dim or base.embed_dim, args.hidden or base.hidden, args.rounds or base.rounds
    )


def cmd_train(args) -> None:
    if args.input:
        g = _read_input(args.input, args.prepare)
        split = DatasetSplit([g], [g], [g])
    else:
        split = make_split(GeneratorSpec(Family(args.family), args.n), args.n_train, args.n_validate, 0, args.seed)
    n_sims = args.n_sims if args.n_sims is not None else (40 if args.input else None)
    cfg = EpisodeConfig(_strategy(args), args.L, n_sims)
    net, sched = _net(args), _schedule(args)
    rng = np.random.default_rng(args.seed)
    if args.agent == "sl":
        res = train_sl(split, cfg, net, sched, rng)
        checkpoint.save(args.checkpoint, res.params, net, kind=checkpoint.KIND_REGRESSOR)
        log_rows = res.log.rows
    else:
        res = train_dqn(split, cfg, net, sched, rng)
        checkpoint.save(args.checkpoint, res.params, net, res.adam)
        log_rows = res.log.rows
    if args.log:
        write_training_log(args.log, log_rows)
    print(f"best_step,{res.log.best_step}")
    print(f"best_validation,{fmt(res.log.best_value)}")


def cmd_evaluate(args) -> None:
    params, net, _, kind = checkpoint.load(args.checkpoint)
    cfg = EpisodeConfig(_strategy(args), args.L, args.n_sims)
    graphs = _test_graphs(args)
    if kind == checkpoint.KIND_REGRESSOR:
        rewards = eval_sl(graphs, params, net, cfg, args.seed)
    else:
        rewards = evaluate_greedy(graphs, params, net, cfg, args.seed)
    _emit(args.out, ["graph_id", "reward"], _per_graph_rows(rewards))


def cmd_table(args) -> None:
    exp = load_config(args.config)
    rows = run_table(exp, args.out)
    print(f"{len(rows)} summary rows written to {args.out or exp.output_dir}")


def cmd_sweep(args) -> None:
    exp = load_config(args.config)
    if args.sizes:
        exp.sizes = args.sizes
    dqn = sl = None
    net = None
    for path in args.checkpoint or []:
        params, net_cfg, _, kind = checkpoint.load(path)
        net = net_cfg
        if kind == checkpoint.KIND_REGRESSOR:
            sl = params
        else:
            dqn = params
    rows = run_size_sweep(exp, dqn, net, sl, args.out)
    print(f"{len(rows)} sweep rows written to {args.out or exp.output_dir}")


def cmd_curve(args) -> None:
    exp = load_config(args.config)
    rows = run_validation_curve(exp, args.out)
    print(f"{len(rows)} curve rows written to {args.out or exp.output_dir}")


def cmd_dot(args) -> None:
    export_dot(_read_input(args.input, args.prepare), args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robustgraph", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write synthetic graphs and a manifest")
    p.add_argument("--family", choices=["ba", "er"], required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--er-fraction", type=float, default=0.2)
    p.add_argument("--ba-m", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", help="Monte Carlo robustness of one graph")
    p.add_argument("--input", required=True)
    p.add_argument("--prepare", action="store_true", help="take the largest component of a raw edge list")
    _add_objective(p, "--strategy")
    p.add_argument("--n-sims", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("baseline", help="run a classical strategy on test graphs")
    p.add_argument("--strategy", choices=[k.value for k in BaselineKind], required=True)
    _add_objective(p)
    _add_graph_source(p)
    p.add_argument("--prepare", action="store_true")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--n-sims", type=int)
    p.add_argument("--greedy-n-sims", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train", help="train a DQN (or SL regressor) and save a checkpoint")
    p.add_argument("--agent", choices=["dqn", "sl"], default="dqn")
    _add_objective(p)
    _add_graph_source(p)
    p.add_argument("--prepare", action="store_true")
    p.add_argument("--n-train", type=int, default=500)
    p.add_argument("--n-validate", type=int, default=50)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--n-sims", type=int)
    p.add_argument("--embed-dim", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--total-steps", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--target-sync-every", type=int)
    p.add_argument("--validation-every", type=int)
    p.add_argument("--eps-decay-fraction", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--log", help="training log CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on test graphs")
    p.add_argument("--checkpoint", required=True)
    _add_objective(p)
    _add_graph_source(p)
    p.add_argument("--prepare", action="store_true")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--n-sims", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    for name, func, text in (
        ("table", cmd_table, "agent x setting results table"),
        ("curve", cmd_curve, "validation curves over training"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="evaluate on larger graphs")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", action="append", help="DQN or SL checkpoint (repeatable)")
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dot", help="export a graph as DOT")
    p.add_argument("--input", required=True)
    p.add_argument("--prepare", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dot)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (GraphError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
