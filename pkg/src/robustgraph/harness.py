"""Experiment orchestration: tables, size sweeps, validation curves, DOT export.

Every run writes raw per-graph values next to its summary so any summary
number can be recomputed. Output floats use ``repr`` and rows come out in a
fixed order, so reruns with the same config are byte-identical.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .agents import (
    TrainSchedule,
    evaluate_greedy,
    sl_policy,
    train_dqn,
    train_sl,
)
from .baselines import BaselineKind, run_baseline
from .env import EpisodeConfig, run_episode, scale_budget
from .generators import DatasetSplit, Family, GeneratorSpec, generate_many, graph_seed, load_and_prepare, make_split
from .graph import Graph
from .neural import NetConfig, Params
from .robustness import RemovalStrategy

AGENTS = ("random", "ldp", "fv", "eres", "greedy", "sl", "dqn")
DETERMINISTIC = ("ldp", "fv", "eres", "greedy")
# Greedy and SL are too slow beyond this size in sweeps
EXPENSIVE_CAP = 50


@dataclass
class ExperimentConfig:
    objectives: list[str] = field(default_factory=lambda: ["random", "targeted"])
    families: list[str] = field(default_factory=lambda: ["ba", "er"])
    budgets: list[int] = field(default_factory=lambda: [2, 5, 10])
    n: int = 20
    tau: float | None = None  # informational; budgets are given directly
    agents: list[str] = field(default_factory=lambda: list(AGENTS))
    n_seeds: int = 3
    n_train: int = 500
    n_validate: int = 50
    n_test: int = 100
    n_sims: int | None = None  # None: 2N
    greedy_n_sims: int | None = None
    master_seed: int = 0
    net: dict = field(default_factory=dict)
    schedule: dict = field(default_factory=dict)
    sizes: list[int] = field(default_factory=lambda: [20, 30, 50])
    budget_scaling: str = "pairs"
    graph_path: str | None = None  # real-world mode: one prepared edge list
    output_dir: str = "results"

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be at least 1")
        unknown = set(self.agents) - set(AGENTS)
        if unknown:
            raise ValueError(f"unknown agents: {sorted(unknown)}")
        if self.graph_path is not None and not os.path.exists(self.graph_path):
            raise FileNotFoundError(self.graph_path)

    @property
    def real_world(self) -> bool:
        return self.graph_path is not None

    @property
    def mc_sims(self) -> int | None:
        return self.n_sims if self.n_sims is not None or not self.real_world else 40

    def net_config(self) -> NetConfig:
        base = NetConfig.real_world() if self.real_world else NetConfig.synthetic()
        return replace(base, **self.net)

    def train_schedule(self) -> TrainSchedule:
        sched = dict(self.schedule)
        if self.real_world:
            sched.setdefault("eps_decay_fraction", 0.1)
        return TrainSchedule(**sched)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    known = {f.name for f in fields(ExperimentConfig)}
    extra = set(raw) - known
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    return ExperimentConfig(**raw)


# -- statistics -------------------------------------------------------------

def ci_halfwidth(values) -> float:
    """1.96 sample standard deviations over sqrt(count); 0 for a single value."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0.0
    return float(1.96 * v.std(ddof=1) / math.sqrt(v.size))


def fmt(x: float) -> str:
    return repr(float(x))


def write_csv(path: str | os.PathLike, header: list[str], rows: list[list]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) if isinstance(x, float) else x for x in r])


# -- datasets ---------------------------------------------------------------

def family_spec(family: str, n: int) -> GeneratorSpec:
    return GeneratorSpec(Family(family), n)


def dataset_for(cfg: ExperimentConfig, family: str, n: int | None = None) -> DatasetSplit:
    if cfg.real_world:
        g = load_and_prepare(cfg.graph_path)
        return DatasetSplit([g], [g], [g])
    return make_split(family_spec(family, n or cfg.n), cfg.n_train, cfg.n_validate, cfg.n_test, cfg.master_seed)


def episode_config(objective: str, L: int, n_sims: int | None) -> EpisodeConfig:
    return EpisodeConfig(RemovalStrategy.parse(objective), L, n_sims)


# -- evaluation -------------------------------------------------------------

def eval_baseline(
    kind: BaselineKind, graphs: list[Graph], cfg: EpisodeConfig, seed: int, greedy_n_sims: int | None = None
) -> np.ndarray:
    """Per-graph reward; graph ``i`` uses the stream ``(seed, i)``."""
    return np.array(
        [
            run_baseline(g, kind, cfg, np.random.default_rng([seed, i]), greedy_n_sims).reward
            for i, g in enumerate(graphs)
        ]
    )


def eval_sl(graphs: list[Graph], params: Params, net_cfg: NetConfig, cfg: EpisodeConfig, seed: int) -> np.ndarray:
    return np.array(
        [
            run_episode(g, sl_policy(params, net_cfg), cfg, np.random.default_rng([seed, i])).reward
            for i, g in enumerate(graphs)
        ]
    )


def _agent_rewards(
    agent: str,
    split: DatasetSplit,
    cfg: EpisodeConfig,
    exp: ExperimentConfig,
    seed_index: int,
    eval_seed: int,
    graphs: list[Graph] | None = None,
) -> np.ndarray:
    graphs = split.test if graphs is None else graphs
    if agent in ("random", "ldp", "fv", "eres", "greedy"):
        return eval_baseline(BaselineKind(agent), graphs, cfg, eval_seed, exp.greedy_n_sims)
    net_cfg = exp.net_config()
    train_seed = graph_seed(exp.master_seed, 7, seed_index)
    if agent == "sl":
        res = train_sl(split, cfg, net_cfg, exp.train_schedule(), np.random.default_rng(train_seed))
        return eval_sl(graphs, res.params, net_cfg, cfg, eval_seed)
    res = train_dqn(split, cfg, net_cfg, exp.train_schedule(), np.random.default_rng(train_seed))
    return evaluate_greedy(graphs, res.params, net_cfg, cfg, eval_seed)


def _seeds_for(agent: str, exp: ExperimentConfig) -> int:
    return 1 if agent in DETERMINISTIC else exp.n_seeds


RAW_HEADER = ["objective", "family", "L", "agent", "seed", "graph_id", "reward"]
SUMMARY_HEADER = ["objective", "family", "L", "agent", "mean", "ci", "best", "n_seeds"]


def run_table(exp: ExperimentConfig, out_dir: str | os.PathLike | None = None) -> list[list]:
    """Evaluate every agent over the (objective, family, L) grid.

    Writes ``raw.csv`` (one row per seed and test graph) and ``summary.csv``
    (one row per grid cell and agent). ``mean`` averages the per-seed means,
    ``ci`` is the 1.96 sigma half-width over seeds and ``best`` the best seed.
    Evaluation streams are shared across agents so comparisons are paired.
    """
    out = Path(out_dir or exp.output_dir)
    raw_rows: list[list] = []
    summary: list[list] = []
    families = ["real"] if exp.real_world else exp.families
    for objective in exp.objectives:
        for family in families:
            split = dataset_for(exp, family)
            for L in exp.budgets:
                cfg = episode_config(objective, L, exp.mc_sims)
                for agent in exp.agents:
                    if agent == "sl" and exp.real_world:
                        continue
                    seed_means = []
                    for s in range(_seeds_for(agent, exp)):
                        eval_seed = graph_seed(exp.master_seed, 11, s)
                        r = _agent_rewards(agent, split, cfg, exp, s, eval_seed)
                        raw_rows += [[objective, family, L, agent, s, i, float(x)] for i, x in enumerate(r)]
                        seed_means.append(float(np.mean(r)))
                    summary.append(
                        [objective, family, L, agent, float(np.mean(seed_means)),
                         ci_halfwidth(seed_means), float(max(seed_means)), len(seed_means)]
                    )
    write_csv(out / "raw.csv", RAW_HEADER, raw_rows)
    write_csv(out / "summary.csv", SUMMARY_HEADER, summary)
    return summary


SWEEP_HEADER = ["objective", "family", "n", "L", "agent", "mean", "ci", "n_graphs"]


def run_size_sweep(
    exp: ExperimentConfig,
    dqn_params: Params | None = None,
    net_cfg: NetConfig | None = None,
    sl_params: Params | None = None,
    out_dir: str | os.PathLike | None = None,
) -> list[list]:
    """Evaluate fixed models and baselines on larger generated graphs.

    The ER edge fraction stays fixed, so m grows with N; each base budget is
    carried over with :func:`scale_budget`. Greedy and SL stop at 50 nodes.
    """
    out = Path(out_dir or exp.output_dir)
    net_cfg = net_cfg or exp.net_config()
    raw_rows: list[list] = []
    rows: list[list] = []
    for objective in exp.objectives:
        for family in exp.families:
            for n in exp.sizes:
                graphs = generate_many(family_spec(family, n), exp.n_test, exp.master_seed, 3 + n)
                for L0 in exp.budgets:
                    L = scale_budget(L0, exp.n, n, exp.budget_scaling)
                    cfg = episode_config(objective, L, exp.mc_sims)
                    eval_seed = graph_seed(exp.master_seed, 13, n)
                    for agent in exp.agents:
                        if agent in ("greedy", "sl") and n > EXPENSIVE_CAP:
                            continue
                        if agent == "dqn":
                            if dqn_params is None:
                                continue
                            r = evaluate_greedy(graphs, dqn_params, net_cfg, cfg, eval_seed)
                        elif agent == "sl":
                            if sl_params is None:
                                continue
                            r = eval_sl(graphs, sl_params, net_cfg, cfg, eval_seed)
                        else:
                            r = eval_baseline(BaselineKind(agent), graphs, cfg, eval_seed, exp.greedy_n_sims)
                        raw_rows += [[objective, family, n, L, agent, i, float(x)] for i, x in enumerate(r)]
                        rows.append([objective, family, n, L, agent, float(np.mean(r)), ci_halfwidth(r), len(r)])
    write_csv(out / "sweep_raw.csv", ["objective", "family", "n", "L", "agent", "graph_id", "reward"], raw_rows)
    write_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    return rows


def run_validation_curve(exp: ExperimentConfig, out_dir: str | os.PathLike | None = None) -> list[list]:
    """Train DQN for each seed and emit its validation series.

    ``curve_raw.csv`` holds (objective, family, L, seed, step, validation);
    ``curve.csv`` aggregates per step across seeds.
    """
    out = Path(out_dir or exp.output_dir)
    raw_rows: list[list] = []
    rows: list[list] = []
    families = ["real"] if exp.real_world else exp.families
    for objective in exp.objectives:
        for family in families:
            split = dataset_for(exp, family)
            for L in exp.budgets:
                cfg = episode_config(objective, L, exp.mc_sims)
                series = []
                for s in range(exp.n_seeds):
                    res = train_dqn(
                        split, cfg, exp.net_config(), exp.train_schedule(),
                        np.random.default_rng(graph_seed(exp.master_seed, 7, s)),
                    )
                    pts = res.log.validation_series()
                    series.append(pts)
                    raw_rows += [[objective, family, L, s, st, float(v)] for st, v in pts]
                for k, (st, _) in enumerate(series[0]):
                    vals = [ser[k][1] for ser in series]
                    rows.append([objective, family, L, st, float(np.mean(vals)), ci_halfwidth(vals)])
    write_csv(out / "curve_raw.csv", ["objective", "family", "L", "seed", "step", "validation"], raw_rows)
    write_csv(out / "curve.csv", ["objective", "family", "L", "step", "mean", "ci"], rows)
    return rows


def write_training_log(path: str | os.PathLike, log_rows: list[dict]) -> None:
    write_csv(
        path,
        ["step", "loss", "epsilon", "validation"],
        [[r["step"], float(r["loss"]), float(r["epsilon"]), float(r["validation"])] for r in log_rows],
    )


# -- DOT ----------------------------------------------------------------

def to_dot(g: Graph, name: str = "G", highlight: list[tuple[int, int]] | None = None) -> str:
    """DOT text; ``highlight`` edges (e.g. added ones) are drawn red."""
    marked = {tuple(sorted(e)) for e in highlight or ()}
    lines = [f"graph {name} {{"]
    lines += [f"  {v};" for v in g.live_nodes()]
    for u, v in g.edges():
        attr = " [color=red]" if (u, v) in marked else ""
        lines.append(f"  {u} -- {v}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(g: Graph, path: str | os.PathLike, highlight: list[tuple[int, int]] | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(to_dot(g, highlight=highlight))
