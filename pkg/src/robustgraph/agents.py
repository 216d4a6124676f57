"""DQN agent over S2V embeddings, and the supervised regression baseline."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import EdgeSelectorPolicy
from .env import (
    Episode,
    EnvState,
    EpisodeConfig,
    estimate_objective,
    reset,
    run_episode,
    step,
    valid_actions,
)
from .errors import CompleteGraphError, TerminalStateError
from .generators import DatasetSplit
from .graph import Graph, NodePair
from .neural import (
    AdamState,
    GraphBatch,
    NetConfig,
    Params,
    adam_step,
    copy_params,
    glorot_init,
    grad_mse,
    grad_td_loss,
    predict_values,
    q_values_batch,
    regressor_param_shapes,
)
from .robustness import as_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainSchedule:
    total_steps: int = 40_000
    batch_size: int = 50
    target_sync_every: int = 50
    gamma: float = 1.0
    eps_start: float = 1.0
    eps_end: float = 0.1
    eps_decay_fraction: float = 0.5
    reward_scale: float = 100.0
    validation_every: int | None = None  # None: total_steps // 100
    lr: float = 1e-4
    buffer_capacity: int | None = None  # None: total_steps
    sl_patience: int = 10_000

    def __post_init__(self):
        if self.eps_end > self.eps_start:
            raise ValueError("eps_end must not exceed eps_start")
        for name in ("total_steps", "batch_size", "target_sync_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    @classmethod
    def for_tau(cls, tau: float, real_world: bool = False, **overrides) -> "TrainSchedule":
        base = {"total_steps": int(round(40_000 * tau))}
        if real_world:
            base["eps_decay_fraction"] = 0.1
        base.update(overrides)
        return cls(**base)

    @property
    def validate_every(self) -> int:
        return self.validation_every or max(1, self.total_steps // 100)

    @property
    def capacity(self) -> int:
        return self.buffer_capacity or self.total_steps


def epsilon_at(step: int, sched: TrainSchedule) -> float:
    """Linear decay over the first ``eps_decay_fraction`` of training, then flat."""
    window = sched.eps_decay_fraction * sched.total_steps
    if window <= 0 or step >= window:
        return sched.eps_end
    return sched.eps_start + (sched.eps_end - sched.eps_start) * step / window


# -- replay ------------------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    state: EnvState
    action: int
    reward: float  # already scaled
    next_state: EnvState
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, tr: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(tr)
        else:
            self._items[self._next] = tr
        self._next = (self._next + 1) % self.capacity

    def sample(self, k: int, rng: np.random.Generator) -> list[Transition]:
        idx = rng.choice(len(self._items), size=min(k, len(self._items)), replace=False)
        return [self._items[i] for i in idx]


# -- acting ------------------------------------------------------------------

# Q-values this close count as tied. Symmetric nodes have equal Q in exact
# arithmetic, and batching changes summation order.
Q_TIE_TOL = 1e-9


def _argmax_first(q: np.ndarray) -> int:
    best = q.max()
    return int(np.flatnonzero(q >= best - Q_TIE_TOL * max(1.0, abs(best)))[0])


def act_greedy(s: EnvState, params: Params, net_cfg: NetConfig) -> int:
    """Highest-Q valid action; ties (within ``Q_TIE_TOL``) go to the smallest node id."""
    actions = valid_actions(s)
    if not actions:
        raise TerminalStateError("no valid actions")
    q = q_values_batch(GraphBatch([s.graph], [s.edge_stub]), [actions], params, net_cfg)[0]
    return actions[_argmax_first(q)]


def greedy_actions(states: list[EnvState], params: Params, net_cfg: NetConfig) -> list[int]:
    """:func:`act_greedy` for many states with one batched forward pass."""
    acts = [valid_actions(s) for s in states]
    qs = q_values_batch(GraphBatch.from_states(states), acts, params, net_cfg)
    return [a[_argmax_first(q)] for a, q in zip(acts, qs)]


class GreedyPolicy:
    def __init__(self, params: Params, net_cfg: NetConfig):
        self.params = params
        self.net_cfg = net_cfg

    def __call__(self, state: EnvState, actions: list) -> int:
        return act_greedy(state, self.params, self.net_cfg)


def evaluate_greedy(
    graphs: list[Graph],
    params: Params,
    net_cfg: NetConfig,
    cfg: EpisodeConfig,
    seed: int,
    f_initial: list[float] | None = None,
) -> np.ndarray:
    """Unscaled episode reward of the greedy policy on each graph.

    Episodes run in lockstep so each step is one batched forward pass. Graph
    ``i`` draws its estimates from ``default_rng([seed, i])``, which makes two
    checkpoints evaluated with the same seed directly comparable.
    """
    rngs = [np.random.default_rng([seed, i]) for i in range(len(graphs))]
    states = [
        reset(g, cfg, rngs[i], None if f_initial is None else f_initial[i])
        for i, g in enumerate(graphs)
    ]
    rewards = np.zeros(len(graphs))
    live = list(range(len(graphs)))
    while live:
        acts = greedy_actions([states[i] for i in live], params, net_cfg)
        still = []
        for i, a in zip(live, acts):
            out = step(states[i], a, cfg, rngs[i])
            rewards[i] += out.reward
            states[i] = out.next_state
            if not out.terminal:
                still.append(i)
        live = still
    return rewards


# -- DQN training ---------------------------------------------------------

@dataclass
class TrainLog:
    rows: list[dict] = field(default_factory=list)
    best_step: int = 0
    best_value: float = -math.inf

    def validation_series(self) -> list[tuple[int, float]]:
        return [(r["step"], r["validation"]) for r in self.rows]


@dataclass
class TrainResult:
    params: Params  # best by validation
    final_params: Params
    log: TrainLog
    adam: AdamState


def td_targets(
    batch: list[Transition], target_params: Params, net_cfg: NetConfig, gamma: float
) -> np.ndarray:
    y = np.array([tr.reward for tr in batch], dtype=np.float64)
    boot = [i for i, tr in enumerate(batch) if not tr.terminal]
    if boot:
        nxt = [batch[i].next_state for i in boot]
        acts = [valid_actions(s) for s in nxt]
        qs = q_values_batch(GraphBatch.from_states(nxt), acts, target_params, net_cfg)
        for i, q in zip(boot, qs):
            y[i] += gamma * float(q.max())
    return y


def train_dqn(
    split: DatasetSplit,
    cfg: EpisodeConfig,
    net_cfg: NetConfig,
    sched: TrainSchedule,
    rng=None,
    epsilon_override: float | None = None,
    on_transition=None,
    on_update=None,
) -> TrainResult:
    """Train with experience replay and a periodically synced target network.

    The parameters scoring best on ``split.validate`` are returned as
    ``params``. ``epsilon_override`` pins exploration (used by tests);
    ``on_transition`` is called with every stored transition and
    ``on_update(step, params, target)`` after every environment step.
    """
    if not split.train:
        raise ValueError("training set is empty")
    rng = as_rng(rng)
    params = glorot_init(net_cfg, rng)
    target = copy_params(params)
    adam = AdamState.for_params(params, sched.lr)
    buffer = ReplayBuffer(sched.capacity)
    val_seed = int(rng.integers(0, 2**63))
    val_graphs = split.validate or split.train[:1]
    val_f0 = [
        estimate_objective(g, cfg, np.random.default_rng([val_seed, i]))
        for i, g in enumerate(val_graphs)
    ]
    tlog = TrainLog()
    best = copy_params(params)
    window_losses: list[float] = []

    def validate(step_no: int) -> None:
        nonlocal best
        vals = evaluate_greedy(val_graphs, params, net_cfg, cfg, val_seed, val_f0)
        value = float(vals.mean())
        tlog.rows.append(
            {
                "step": step_no,
                "loss": float(np.mean(window_losses)) if window_losses else float("nan"),
                "epsilon": epsilon_at(min(step_no, sched.total_steps), sched)
                if epsilon_override is None else epsilon_override,
                "validation": value,
            }
        )
        window_losses.clear()
        if value > tlog.best_value:
            tlog.best_value = value
            tlog.best_step = step_no
            best = copy_params(params)
        log.debug("step %d validation %.4f", step_no, value)

    validate(0)
    state: EnvState | None = None
    for t in range(sched.total_steps):
        if state is None:
            g0 = split.train[int(rng.integers(len(split.train)))]
            state = reset(g0, cfg, rng)
        eps = epsilon_at(t, sched) if epsilon_override is None else epsilon_override
        actions = valid_actions(state)
        if rng.random() < eps:
            a = actions[int(rng.integers(len(actions)))]
        else:
            a = act_greedy(state, params, net_cfg)
        out = step(state, a, cfg, rng)
        tr = Transition(state, a, out.reward * sched.reward_scale, out.next_state, out.terminal)
        buffer.push(tr)
        if on_transition is not None:
            on_transition(tr)
        state = None if out.terminal else out.next_state

        if len(buffer) >= sched.batch_size:
            batch = buffer.sample(sched.batch_size, rng)
            y = td_targets(batch, target, net_cfg, sched.gamma)
            loss, grads = grad_td_loss(
                [(tr.state, tr.action, yi) for tr, yi in zip(batch, y)], params, net_cfg
            )
            params, adam = adam_step(params, grads, adam)
            window_losses.append(loss)
        done = t + 1
        if done % sched.target_sync_every == 0:
            target = copy_params(params)
        if on_update is not None:
            on_update(done, params, target)
        if done % sched.validate_every == 0 or done == sched.total_steps:
            if not tlog.rows or tlog.rows[-1]["step"] != done:
                validate(done)
    return TrainResult(best, params, tlog, adam)


# -- supervised baseline --------------------------------------------------

def sl_pairs(
    graphs: list[Graph], cfg: EpisodeConfig, rng, count: int | None = None
) -> tuple[list[Graph], np.ndarray]:
    """(graph, F estimate) pairs from graphs after 0..L random edge additions."""
    rng = as_rng(rng)
    count = count or len(graphs)
    out_g, out_y = [], []
    for i in range(count):
        g = graphs[i % len(graphs)] if count <= len(graphs) else graphs[int(rng.integers(len(graphs)))]
        j = int(rng.integers(cfg.budget_L + 1))
        h = g
        for _ in range(j):
            cands = h.non_edges()
            if not cands:
                break
            u, v = cands[int(rng.integers(len(cands)))]
            h = h.add_edge(u, v)
        out_g.append(h)
        out_y.append(estimate_objective(h, cfg, rng))
    return out_g, np.array(out_y)


@dataclass
class SLResult:
    params: Params
    log: TrainLog
    stopped_at: int


def train_sl(
    split: DatasetSplit,
    cfg: EpisodeConfig,
    net_cfg: NetConfig,
    sched: TrainSchedule,
    rng=None,
    train_pairs: tuple[list[Graph], np.ndarray] | None = None,
    validate_pairs: tuple[list[Graph], np.ndarray] | None = None,
) -> SLResult:
    """Regress the objective with MSE; keep the parameters with the lowest validation loss."""
    if not split.train:
        raise ValueError("training set is empty")
    rng = as_rng(rng)
    tr_g, tr_y = train_pairs or sl_pairs(split.train, cfg, rng)
    va_g, va_y = validate_pairs or sl_pairs(split.validate or split.train, cfg, rng)
    tr_y = np.asarray(tr_y) * sched.reward_scale
    va_y = np.asarray(va_y) * sched.reward_scale

    params = glorot_init(net_cfg, rng, regressor_param_shapes(net_cfg))
    adam = AdamState.for_params(params, sched.lr)
    tlog = TrainLog()
    best = copy_params(params)
    best_loss = math.inf
    last_improved = 0
    window: list[float] = []

    def val_loss() -> float:
        return float(np.mean((predict_values(va_g, params, net_cfg) - va_y) ** 2))

    def checkpoint(step_no: int) -> None:
        nonlocal best, best_loss, last_improved
        vl = val_loss()
        tlog.rows.append(
            {
                "step": step_no,
                "loss": float(np.mean(window)) if window else float("nan"),
                "epsilon": float("nan"),
                "validation": -vl,
            }
        )
        window.clear()
        if vl < best_loss:
            best_loss = vl
            best = copy_params(params)
            last_improved = step_no
            tlog.best_step, tlog.best_value = step_no, -vl

    checkpoint(0)
    stopped = sched.total_steps
    for t in range(sched.total_steps):
        idx = rng.choice(len(tr_g), size=min(sched.batch_size, len(tr_g)), replace=False)
        loss, grads = grad_mse([tr_g[i] for i in idx], tr_y[idx], params, net_cfg)
        params, adam = adam_step(params, grads, adam)
        window.append(loss)
        done = t + 1
        if done % sched.validate_every == 0 or done == sched.total_steps:
            checkpoint(done)
            if done - last_improved >= sched.sl_patience:
                stopped = done
                break
    return SLResult(best, tlog, stopped)


def act_sl(g: Graph, params: Params, net_cfg: NetConfig) -> NodePair:
    """Non-edge whose addition maximizes the predicted objective."""
    cands = g.non_edges()
    if not cands:
        raise CompleteGraphError("graph is complete; no edge can be added")
    preds = predict_values([g.add_edge(u, v) for u, v in cands], params, net_cfg)
    return cands[_argmax_first(preds)]


def sl_policy(params: Params, net_cfg: NetConfig) -> EdgeSelectorPolicy:
    return EdgeSelectorPolicy(lambda g: act_sl(g, params, net_cfg))


def run_agent_episode(g0: Graph, params: Params, net_cfg: NetConfig, cfg: EpisodeConfig, rng=None) -> Episode:
    return run_episode(g0, GreedyPolicy(params, net_cfg), cfg, rng)
