"""Binary checkpoint format.

Layout, all integers little-endian::

    b"RNDQ"                      magic
    u32 version                  currently 1
    u32 tensor count
    per tensor:
        u32 name length, UTF-8 name
        u32 rank, u64 dims[rank]
        f64 values[prod(dims)]   row-major

Network parameters are stored under their own names (``theta1`` ...). The
network config is stored as rank-0 tensors ``config.embed_dim``,
``config.hidden`` and ``config.rounds``; an optional model kind as
``config.kind`` (0 = Q-network, 1 = regressor). Optimizer state, when present,
uses ``adam.step``, ``adam.lr``, ``adam.beta1``, ``adam.beta2``, ``adam.eps``
and ``adam.m.<name>`` / ``adam.v.<name>``.
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .neural import AdamState, NetConfig, Params

MAGIC = b"RNDQ"
VERSION = 1
KIND_Q = 0
KIND_REGRESSOR = 1


def _tensors(params: Params, cfg: NetConfig, adam: AdamState | None, kind: int) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {
        "config.embed_dim": np.float64(cfg.embed_dim),
        "config.hidden": np.float64(cfg.hidden),
        "config.rounds": np.float64(cfg.rounds),
        "config.kind": np.float64(kind),
    }
    for name in sorted(params):
        out[name] = params[name]
    if adam is not None:
        out["adam.step"] = np.float64(adam.step)
        out["adam.lr"] = np.float64(adam.lr)
        out["adam.beta1"] = np.float64(adam.beta1)
        out["adam.beta2"] = np.float64(adam.beta2)
        out["adam.eps"] = np.float64(adam.eps)
        for name in sorted(params):
            out[f"adam.m.{name}"] = adam.m[name]
            out[f"adam.v.{name}"] = adam.v[name]
    return out


def dumps(params: Params, cfg: NetConfig, adam: AdamState | None = None, kind: int = KIND_Q) -> bytes:
    tensors = _tensors(params, cfg, adam, kind)
    chunks = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype="<f8")
        raw = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw)))
        chunks.append(raw)
        chunks.append(struct.pack("<I", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        chunks.append(np.ascontiguousarray(arr).tobytes())
    return b"".join(chunks)


def loads(data: bytes) -> tuple[Params, NetConfig, AdamState | None, int]:
    if data[:4] != MAGIC:
        raise ValueError("not a checkpoint: bad magic")
    version, count = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    pos = 12
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        name = data[pos:pos + nlen].decode("utf-8")
        pos += nlen
        (rank,) = struct.unpack_from("<I", data, pos)
        pos += 4
        dims = struct.unpack_from(f"<{rank}Q", data, pos)
        pos += 8 * rank
        size = int(np.prod(dims, dtype=np.int64))
        arr = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(dims)
        pos += 8 * size
        tensors[name] = arr.astype(np.float64)
    if pos != len(data):
        raise ValueError("trailing bytes after the last tensor")

    cfg = NetConfig(
        int(tensors.pop("config.embed_dim")),
        int(tensors.pop("config.hidden")),
        int(tensors.pop("config.rounds")),
    )
    kind = int(tensors.pop("config.kind", KIND_Q))
    adam = None
    if "adam.step" in tensors:
        scalars = {k: float(tensors.pop(f"adam.{k}")) for k in ("step", "lr", "beta1", "beta2", "eps")}
        m = {k[len("adam.m."):]: tensors.pop(k) for k in list(tensors) if k.startswith("adam.m.")}
        v = {k[len("adam.v."):]: tensors.pop(k) for k in list(tensors) if k.startswith("adam.v.")}
        adam = AdamState(m, v, int(scalars["step"]), scalars["lr"], scalars["beta1"], scalars["beta2"], scalars["eps"])
    return tensors, cfg, adam, kind


def save(path: str | os.PathLike, params: Params, cfg: NetConfig, adam: AdamState | None = None, kind: int = KIND_Q) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(params, cfg, adam, kind))


def load(path: str | os.PathLike) -> tuple[Params, NetConfig, AdamState | None, int]:
    with open(path, "rb") as fh:
        return loads(fh.read())
