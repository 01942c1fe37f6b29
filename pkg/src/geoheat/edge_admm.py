"""Edge-difference formulation of the gradient correction.

One scalar per edge, ``x_e = d(j) - d(i)`` for the edge ``(i, j)``, ``i < j``,
is fitted to the target differences induced by each incident face's target
gradient, subject to the per-face loop condition ``sum_k s_k x_k = 0``.  The
solver keeps three auxiliary and three dual scalars per face, which is about
a third of the face formulation's state.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from . import _parallel
from .face_admm import AdmmConfig, face_state_bytes
from .report import SolverReport

__all__ = [
    "EdgeAdmmState",
    "target_edge_differences",
    "w_update_face",
    "x_update_edge",
    "admm_edge_optimize",
    "edge_state_bytes",
    "solver_state_bytes",
]


@dataclass
class EdgeAdmmState:
    X: np.ndarray
    W: np.ndarray
    Lam: np.ndarray
    signs: np.ndarray
    target_sum: np.ndarray
    mu: float
    primal_history: list = field(default_factory=list)
    dual_history: list = field(default_factory=list)

    @property
    def nbytes(self):
        arrays = (self.X, self.W, self.Lam, self.signs, self.target_sum)
        return int(sum(a.nbytes for a in arrays))


def target_edge_differences(mesh, H):
    """``h . e`` for each face and each of its edges, ``e`` along the edge's
    orientation.  Shape ``(n_faces, 3)``, aligned with ``mesh.face_edges``."""
    H = np.asarray(H, dtype=np.float64)
    vec = mesh.edge_vectors[mesh.face_edges]
    return np.einsum("fj,fkj->fk", H, vec)


def w_update_face(x_f, lam_f, q_f, mu):
    """Projection of ``x_f - lam_f / mu`` onto the plane ``q_f . w = 0``."""
    x_f = np.asarray(x_f, dtype=np.float64)
    lam_f = np.asarray(lam_f, dtype=np.float64)
    q = np.asarray(q_f, dtype=np.float64)
    v = x_f - lam_f / mu
    return v - q * (np.sum(q * v, axis=-1, keepdims=True) / 3.0)


def x_update_edge(targets, duals, auxiliaries, mu):
    """Minimiser of ``sum (x - h)^2 + mu (w - x + lam / mu)^2`` over the one or
    two faces sharing an edge."""
    h = np.asarray(targets, dtype=np.float64).reshape(-1)
    lam = np.asarray(duals, dtype=np.float64).reshape(-1)
    w = np.asarray(auxiliaries, dtype=np.float64).reshape(-1)
    return float(np.sum(h + lam + mu * w) / (h.size * (1.0 + mu)))


def edge_state_bytes(n_faces, n_edges, float_bytes=8, flag_bytes=1):
    """Minimum edge-solver storage: two scalars per edge, six scalars and
    three sign flags per face."""
    return (6 * n_faces + 2 * n_edges) * float_bytes + 3 * n_faces * flag_bytes


def solver_state_bytes(mesh, method):
    """Formula storage of the ``"face"`` or ``"edge"`` solver on ``mesh``."""
    if method == "face":
        return face_state_bytes(mesh.n_faces, mesh.n_interior_edges)
    if method == "edge":
        return edge_state_bytes(mesh.n_faces, mesh.n_edges)
    raise ValueError(f"unknown method {method!r}")


def _edge_iteration(X, X_prev, W, Lam, signs, face_edges, edge_halfedges, target_sum,
                    mu, primal_terms, dual_terms):
    n_faces = W.shape[0]
    n_edges = X.shape[0]
    inv_mu = 1.0 / mu
    for f in prange(n_faces):
        v0 = X[face_edges[f, 0]] - Lam[f, 0] * inv_mu
        v1 = X[face_edges[f, 1]] - Lam[f, 1] * inv_mu
        v2 = X[face_edges[f, 2]] - Lam[f, 2] * inv_mu
        proj = (signs[f, 0] * v0 + signs[f, 1] * v1 + signs[f, 2] * v2) / 3.0
        W[f, 0] = v0 - signs[f, 0] * proj
        W[f, 1] = v1 - signs[f, 1] * proj
        W[f, 2] = v2 - signs[f, 2] * proj

    for e in prange(n_edges):
        acc = target_sum[e]
        count = 0
        for side in range(2):
            h = edge_halfedges[e, side]
            if h >= 0:
                f = h // 3
                k = h - 3 * f
                acc += Lam[f, k] + mu * W[f, k]
                count += 1
        x = acc / (count * (1.0 + mu))
        d = x - X[e]
        X_prev[e] = X[e]
        X[e] = x
        dual_terms[e] = count * d * d

    for f in prange(n_faces):
        acc = 0.0
        for k in range(3):
            r = W[f, k] - X[face_edges[f, k]]
            Lam[f, k] += mu * r
            acc += r * r
        primal_terms[f] = acc


_edge_iteration_parallel = njit(parallel=True, cache=True)(_edge_iteration)
_edge_iteration_serial = njit(cache=True)(_edge_iteration)


def init_edge_state(mesh, H, mu):
    """``x_e`` = mean target difference, ``W`` = per-face targets, duals zero."""
    Z = target_edge_differences(mesh, H)
    counts = (mesh.edge_halfedges >= 0).sum(axis=1)
    target_sum = np.zeros(mesh.n_edges)
    flat = Z.reshape(-1)
    for side in (0, 1):
        h = mesh.edge_halfedges[:, side]
        has = h >= 0
        target_sum[has] += flat[h[has]]
    state = EdgeAdmmState(
        X=target_sum / counts,
        W=np.ascontiguousarray(Z),
        Lam=np.zeros_like(Z),
        signs=np.ascontiguousarray(mesh.face_edge_signs, dtype=np.int8),
        target_sum=target_sum,
        mu=float(mu),
    )
    return state


def admm_edge_optimize(mesh, H, config=None, return_state=False):
    """Fit closed edge differences to the target field ``H``.

    Iterates W-update, X-update and dual ascent until both residuals drop
    below ``sqrt(3 n_faces) * eps`` or ``config.max_iterations`` is reached.

    Returns
    -------
    X : ndarray, shape (n_edges,)
    report : SolverReport
    state : EdgeAdmmState, only when ``return_state`` is true
    """
    config = config or AdmmConfig()
    start = time.perf_counter()
    mu = float(config.mu)
    state = init_edge_state(mesh, H, mu)
    scale = float(np.sqrt(3.0 * mesh.n_faces))
    primal_tol = scale * config.eps_primal
    dual_tol = scale * config.eps_dual

    X_prev = np.empty_like(state.X)
    primal_terms = np.empty(mesh.n_faces)
    dual_terms = np.empty(mesh.n_edges)
    kernel = _edge_iteration_serial if _parallel.is_sequential() else _edge_iteration_parallel

    converged = False
    it = 0
    for it in range(1, int(config.max_iterations) + 1):
        kernel(state.X, X_prev, state.W, state.Lam, state.signs, mesh.face_edges,
               mesh.edge_halfedges, state.target_sum, mu, primal_terms, dual_terms)
        primal = float(np.sqrt(np.sum(primal_terms)))
        dual = mu * float(np.sqrt(np.sum(dual_terms)))
        state.primal_history.append(primal)
        state.dual_history.append(dual)
        if primal <= primal_tol and dual <= dual_tol:
            converged = True
            break

    allocated = state.nbytes + X_prev.nbytes + primal_terms.nbytes + dual_terms.nbytes
    report = SolverReport(
        method="edge",
        iterations=it,
        converged=converged,
        primal_history=list(state.primal_history),
        dual_history=list(state.dual_history),
        primal_tol=primal_tol,
        dual_tol=dual_tol,
        wall_time=time.perf_counter() - start,
        state_bytes=edge_state_bytes(mesh.n_faces, mesh.n_edges),
        allocated_bytes=int(allocated),
    )
    if return_state:
        return state.X, report, state
    return state.X, report
