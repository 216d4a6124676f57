"""structure2vec embeddings and Q-value heads, with hand-written backprop.

Node embeddings follow ``mu_v <- relu(theta1 x_v + theta2 * sum_{u in N(v)} mu_u)``
for ``K`` synchronous rounds starting from zero. The graph embedding is the
sum of node embeddings. Two heads score an action node ``a``::

    no stub:   theta3 relu(theta4 [mu_a, mu_G])
    stub s:    theta5 relu(theta6 [mu_s, mu_a, mu_G])

There are no bias terms. Parameters are plain ``dict[str, ndarray]`` in
float64; every function here is pure given its inputs.

Several graphs are processed at once by stacking their nodes into one
block-diagonal sparse adjacency matrix (:class:`GraphBatch`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidActionError, ShapeMismatchError
from .graph import Graph

Params = dict[str, np.ndarray]


@dataclass(frozen=True)
class NetConfig:
    embed_dim: int = 64
    hidden: int = 128
    rounds: int = 3

    def __post_init__(self):
        if min(self.embed_dim, self.hidden, self.rounds) < 1:
            raise ValueError("network dimensions must be positive")

    @classmethod
    def synthetic(cls) -> "NetConfig":
        return cls(64, 128, 3)

    @classmethod
    def real_world(cls) -> "NetConfig":
        return cls(64, 32, 5)


def q_param_shapes(cfg: NetConfig) -> dict[str, tuple[int, int]]:
    d, h = cfg.embed_dim, cfg.hidden
    return {
        "theta1": (d, 2),
        "theta2": (d, d),
        "theta3": (1, h),
        "theta4": (h, 2 * d),
        "theta5": (1, h),
        "theta6": (h, 3 * d),
    }


def regressor_param_shapes(cfg: NetConfig) -> dict[str, tuple[int, int]]:
    """Graph-level regressor: ``theta3 relu(theta4 mu_G)`` on the same S2V stack."""
    d, h = cfg.embed_dim, cfg.hidden
    return {"theta1": (d, 2), "theta2": (d, d), "theta3": (1, h), "theta4": (h, d)}


def glorot_init(cfg: NetConfig, rng, shapes: dict[str, tuple[int, int]] | None = None) -> Params:
    """Uniform Glorot init, ``U(-a, a)`` with ``a = sqrt(6 / (fan_in + fan_out))``."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    shapes = shapes or q_param_shapes(cfg)
    params = {}
    for name, (fan_out, fan_in) in shapes.items():
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=(fan_out, fan_in))
    return params


def zeros_like(params: Params) -> Params:
    return {k: np.zeros_like(v) for k, v in params.items()}


def copy_params(params: Params) -> Params:
    return {k: v.copy() for k, v in params.items()}


def check_shapes(params: Params, cfg: NetConfig, regressor: bool = False) -> None:
    want = regressor_param_shapes(cfg) if regressor else q_param_shapes(cfg)
    for name, shape in want.items():
        if name not in params:
            raise ShapeMismatchError(f"missing parameter {name}")
        if params[name].shape != shape:
            raise ShapeMismatchError(f"{name} has shape {params[name].shape}, expected {shape}")


def node_features(num_nodes: int, stub: int | None) -> np.ndarray:
    """One-hot rows: ``[0, 1]`` for the edge stub, ``[1, 0]`` for every other node."""
    x = np.zeros((num_nodes, 2))
    x[:, 0] = 1.0
    if stub is not None:
        x[stub] = (0.0, 1.0)
    return x


class GraphBatch:
    """Several (graph, stub) states stacked into one disjoint union."""

    def __init__(self, graphs: list[Graph], stubs: list[int | None] | None = None):
        if stubs is None:
            stubs = [None] * len(graphs)
        sizes = np.array([g.num_nodes for g in graphs], dtype=np.int64)
        self.graphs = graphs
        self.stubs = stubs
        self.sizes = sizes
        self.offsets = np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.int64)
        self.num_nodes = int(sizes.sum())
        self.graph_index = np.repeat(np.arange(len(graphs)), sizes)
        rows, cols = [], []
        for g, off in zip(graphs, self.offsets):
            e = g.edge_array()
            if len(e):
                rows.append(e[:, 0] + off)
                cols.append(e[:, 1] + off)
        if rows:
            r = np.concatenate(rows)
            c = np.concatenate(cols)
            ones = np.ones(2 * len(r))
            self.adj = sp.csr_matrix(
                (ones, (np.concatenate((r, c)), np.concatenate((c, r)))),
                shape=(self.num_nodes, self.num_nodes),
            )
        else:
            self.adj = sp.csr_matrix((self.num_nodes, self.num_nodes))
        x = np.zeros((self.num_nodes, 2))
        x[:, 0] = 1.0
        self.stub_index = np.full(len(graphs), -1, dtype=np.int64)
        for i, s in enumerate(stubs):
            if s is not None:
                self.stub_index[i] = self.offsets[i] + s
                x[self.stub_index[i]] = (0.0, 1.0)
        self.x = x

    @classmethod
    def from_states(cls, states) -> "GraphBatch":
        return cls([s.graph for s in states], [s.edge_stub for s in states])

    def pool(self, mu: np.ndarray) -> np.ndarray:
        if self.num_nodes == 0:
            return np.zeros((len(self.graphs), mu.shape[1]))
        out = np.zeros((len(self.graphs), mu.shape[1]))
        nonempty = self.sizes > 0
        out[nonempty] = np.add.reduceat(mu, self.offsets[nonempty], axis=0)
        return out


@dataclass
class Embedding:
    batch: GraphBatch
    mu: np.ndarray  # (total nodes, d) final-round node embeddings
    pooled: np.ndarray  # (graphs, d)
    msgs: list = field(default_factory=list)  # per-round neighbor sums
    pres: list = field(default_factory=list)  # per-round pre-activations


def embed_batch(batch: GraphBatch, params: Params, cfg: NetConfig) -> Embedding:
    t1, t2 = params["theta1"], params["theta2"]
    if t1.shape != (cfg.embed_dim, 2) or t2.shape != (cfg.embed_dim, cfg.embed_dim):
        raise ShapeMismatchError("embedding parameters do not match the network config")
    base = batch.x @ t1.T
    mu = np.zeros((batch.num_nodes, cfg.embed_dim))
    emb = Embedding(batch, mu, np.empty(0))
    for _ in range(cfg.rounds):
        msg = batch.adj @ mu
        pre = base + msg @ t2.T
        mu = np.maximum(pre, 0.0)
        emb.msgs.append(msg)
        emb.pres.append(pre)
    emb.mu = mu
    emb.pooled = batch.pool(mu)
    return emb


def embed(g: Graph, x: np.ndarray, params: Params, cfg: NetConfig) -> tuple[np.ndarray, np.ndarray]:
    """Node embeddings ``(N, d)`` and the summed graph embedding ``(d,)``."""
    if x.shape != (g.num_nodes, 2):
        raise ShapeMismatchError(f"features have shape {x.shape}, expected {(g.num_nodes, 2)}")
    batch = GraphBatch([g])
    batch.x = np.asarray(x, dtype=np.float64)
    emb = embed_batch(batch, params, cfg)
    return emb.mu, emb.pooled[0]


def _backprop_embedding(emb: Embedding, dmu: np.ndarray, params: Params, grads: Params) -> None:
    """Accumulate theta1/theta2 gradients given dLoss/dmu for the final round."""
    batch = emb.batch
    t2 = params["theta2"]
    for k in range(len(emb.pres) - 1, -1, -1):
        dpre = dmu * (emb.pres[k] > 0)
        grads["theta1"] += dpre.T @ batch.x
        grads["theta2"] += dpre.T @ emb.msgs[k]
        if k == 0:
            break
        dmu = batch.adj @ (dpre @ t2)


# -- Q heads -----------------------------------------------------------------

@dataclass
class Queries:
    """Flat list of (graph in batch, action node, stub node or -1) to score."""

    graph: np.ndarray
    action: np.ndarray  # global node index
    stub: np.ndarray  # global node index, -1 when absent


def _head_inputs(emb: Embedding, q: Queries, with_stub: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu, pooled = emb.mu, emb.pooled
    plain = ~with_stub
    z_plain = np.concatenate((mu[q.action[plain]], pooled[q.graph[plain]]), axis=1)
    z_stub = np.concatenate(
        (mu[q.stub[with_stub]], mu[q.action[with_stub]], pooled[q.graph[with_stub]]), axis=1
    )
    return z_plain, z_stub


def _mlp(z: np.ndarray, w_hidden: np.ndarray, w_out: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h_pre = z @ w_hidden.T
    return (np.maximum(h_pre, 0.0) @ w_out.T)[:, 0], h_pre


def _mlp_backward(dq, z, h_pre, w_hidden, w_out):
    h = np.maximum(h_pre, 0.0)
    d_out = dq[None, :] @ h
    dh_pre = (dq[:, None] * w_out) * (h_pre > 0)
    d_hidden = dh_pre.T @ z
    dz = dh_pre @ w_hidden
    return d_hidden, d_out, dz


def _forward_queries(emb: Embedding, q: Queries, params: Params):
    with_stub = q.stub >= 0
    z_plain, z_stub = _head_inputs(emb, q, with_stub)
    out = np.empty(len(q.action))
    q_plain, h_plain = _mlp(z_plain, params["theta4"], params["theta3"])
    q_stub, h_stub = _mlp(z_stub, params["theta6"], params["theta5"])
    out[~with_stub] = q_plain
    out[with_stub] = q_stub
    return out, (with_stub, z_plain, z_stub, h_plain, h_stub)


def queries_for(batch: GraphBatch, action_lists: list[list[int]]) -> Queries:
    g_idx = np.repeat(np.arange(len(action_lists)), [len(a) for a in action_lists])
    local = np.fromiter((a for acts in action_lists for a in acts), dtype=np.int64, count=len(g_idx))
    return Queries(g_idx, batch.offsets[g_idx] + local, batch.stub_index[g_idx])


def q_values_batch(
    batch: GraphBatch, action_lists: list[list[int]], params: Params, cfg: NetConfig
) -> list[np.ndarray]:
    """Q-values of every listed action in every state of the batch."""
    emb = embed_batch(batch, params, cfg)
    q = queries_for(batch, action_lists)
    vals, _ = _forward_queries(emb, q, params)
    splits = np.cumsum([len(a) for a in action_lists])[:-1]
    return np.split(vals, splits)


def q_values(state, actions: list[int], params: Params, cfg: NetConfig) -> np.ndarray:
    g = state.graph
    for a in actions:
        if not 0 <= a < g.num_nodes or a == state.edge_stub:
            raise InvalidActionError(f"node {a} cannot be scored in this state")
    batch = GraphBatch([g], [state.edge_stub])
    return q_values_batch(batch, [list(actions)], params, cfg)[0]


def grad_td_loss(batch_items, params: Params, cfg: NetConfig) -> tuple[float, Params]:
    """Mean squared TD error and its exact gradient.

    ``batch_items`` is a sequence of ``(state, action, td_target)``.
    """
    if not batch_items:
        raise ValueError("empty batch")
    states = [it[0] for it in batch_items]
    batch = GraphBatch.from_states(states)
    emb = embed_batch(batch, params, cfg)
    q = queries_for(batch, [[it[1]] for it in batch_items])
    targets = np.array([it[2] for it in batch_items], dtype=np.float64)
    pred, (with_stub, z_plain, z_stub, h_plain, h_stub) = _forward_queries(emb, q, params)
    resid = pred - targets
    n = len(batch_items)
    loss = float(np.mean(resid**2))
    dq = 2.0 * resid / n

    grads = zeros_like(params)
    d = cfg.embed_dim
    dmu = np.zeros_like(emb.mu)
    dpooled = np.zeros_like(emb.pooled)

    plain = ~with_stub
    g4, g3, dz = _mlp_backward(dq[plain], z_plain, h_plain, params["theta4"], params["theta3"])
    grads["theta4"] += g4
    grads["theta3"] += g3
    np.add.at(dmu, q.action[plain], dz[:, :d])
    np.add.at(dpooled, q.graph[plain], dz[:, d:])

    g6, g5, dz = _mlp_backward(dq[with_stub], z_stub, h_stub, params["theta6"], params["theta5"])
    grads["theta6"] += g6
    grads["theta5"] += g5
    np.add.at(dmu, q.stub[with_stub], dz[:, :d])
    np.add.at(dmu, q.action[with_stub], dz[:, d:2 * d])
    np.add.at(dpooled, q.graph[with_stub], dz[:, 2 * d:])

    dmu += dpooled[batch.graph_index]
    _backprop_embedding(emb, dmu, params, grads)
    return loss, grads


# -- graph-level regressor ---------------------------------------------------

def predict_values(graphs: list[Graph], params: Params, cfg: NetConfig) -> np.ndarray:
    emb = embed_batch(GraphBatch(graphs), params, cfg)
    return _mlp(emb.pooled, params["theta4"], params["theta3"])[0]


def grad_mse(graphs: list[Graph], targets, params: Params, cfg: NetConfig) -> tuple[float, Params]:
    if not graphs:
        raise ValueError("empty batch")
    batch = GraphBatch(graphs)
    emb = embed_batch(batch, params, cfg)
    pred, h_pre = _mlp(emb.pooled, params["theta4"], params["theta3"])
    resid = pred - np.asarray(targets, dtype=np.float64)
    loss = float(np.mean(resid**2))
    grads = zeros_like(params)
    g4, g3, dpooled = _mlp_backward(2.0 * resid / len(graphs), emb.pooled, h_pre, params["theta4"], params["theta3"])
    grads["theta4"] += g4
    grads["theta3"] += g3
    _backprop_embedding(emb, dpooled[batch.graph_index], params, grads)
    return loss, grads


# -- optimizer ---------------------------------------------------------------

@dataclass
class AdamState:
    m: Params
    v: Params
    step: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Params, lr: float = 1e-4) -> "AdamState":
        return cls(zeros_like(params), zeros_like(params), 0, lr)


def adam_step(params: Params, grads: Params, st: AdamState) -> tuple[Params, AdamState]:
    """One bias-corrected Adam update; inputs are not modified."""
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ShapeMismatchError(f"gradient for {name} has shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient for {name}")
    t = st.step + 1
    c1 = 1.0 - st.beta1**t
    c2 = 1.0 - st.beta2**t
    new_p, new_m, new_v = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        m = st.beta1 * st.m[name] + (1.0 - st.beta1) * g
        v = st.beta2 * st.v[name] + (1.0 - st.beta2) * g * g
        new_p[name] = p - st.lr * (m / c1) / (np.sqrt(v / c2) + st.eps)
        new_m[name] = m
        new_v[name] = v
    return new_p, AdamState(new_m, new_v, t, st.lr, st.beta1, st.beta2, st.eps)
