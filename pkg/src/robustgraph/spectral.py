"""Dense symmetric eigensolver and Laplacian-derived quantities.

The eigensolver is cyclic Jacobi. Graphs handled here have at most a few
hundred nodes, where Jacobi is accurate, deterministic and fast enough.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import ConvergenceError, DisconnectedGraphError, ShapeMismatchError
from .graph import Graph

OFF_DIAGONAL_TOL = 1e-10
MAX_SWEEPS = 100
ZERO_EIGENVALUE_TOL = 1e-9
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]
    sweeps: int


def laplacian(g: Graph) -> np.ndarray:
    n = g.num_nodes
    L = np.zeros((n, n))
    for u, v in g.edges():
        L[u, v] = L[v, u] = -1.0
    L[np.diag_indices(n)] = g.degrees()
    return L


@numba.njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            s += a[i, j] * a[i, j]
    return np.sqrt(2.0 * s)


@numba.njit(cache=True)
def _jacobi(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n)
    for sweep in range(max_sweeps + 1):
        if _off_norm(a) < tol:
            return v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return v, -1


def _fix_signs(vecs: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Flip each column so its first entry with ``|x| > eps`` is positive."""
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, j]) > eps)
        if nz.size and vecs[nz[0], j] < 0:
            vecs[:, j] = -vecs[:, j]
    return vecs


def eigh(a: np.ndarray) -> EigenDecomposition:
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    if n == 0:
        return EigenDecomposition(np.empty(0), np.empty((0, 0)), 0)
    scale = max(1.0, float(np.linalg.norm(a)))
    work = np.ascontiguousarray(a)
    vecs, sweeps = _jacobi(work, OFF_DIAGONAL_TOL * scale, MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    vals = np.diag(work).copy()
    order = np.argsort(vals, kind="stable")
    return EigenDecomposition(vals[order], _fix_signs(vecs[:, order]), sweeps)


def _connected_decomposition(g: Graph) -> EigenDecomposition:
    dec = eigh(laplacian(g))
    if g.num_nodes < 2 or np.sum(dec.eigenvalues <= ZERO_EIGENVALUE_TOL) != 1:
        raise DisconnectedGraphError("graph Laplacian has more than one zero eigenvalue")
    return dec


def algebraic_connectivity(g: Graph) -> float:
    return float(_connected_decomposition(g).eigenvalues[1])


def fiedler_vector(g: Graph) -> np.ndarray:
    """Unit eigenvector of the second-smallest Laplacian eigenvalue."""
    return _connected_decomposition(g).eigenvectors[:, 1].copy()


def laplacian_pseudoinverse(g: Graph) -> np.ndarray:
    dec = _connected_decomposition(g)
    inv = np.zeros_like(dec.eigenvalues)
    keep = dec.eigenvalues > ZERO_EIGENVALUE_TOL
    inv[keep] = 1.0 / dec.eigenvalues[keep]
    V = dec.eigenvectors
    return (V * inv) @ V.T


def effective_resistance(g: Graph) -> np.ndarray:
    """Matrix of pairwise effective resistances ``L+_vv + L+_uu - 2 L+_vu``."""
    P = laplacian_pseudoinverse(g)
    d = np.diag(P)
    return d[:, None] + d[None, :] - 2.0 * P
