"""Closest integrable face-gradient field by ADMM.

Minimises ``sum_f A_f |g_f - h_f|^2`` subject to equal projections of the two
face gradients on every interior edge.  Each interior edge carries a pair of
auxiliary gradients ``y1, y2`` (one per incident face) with dual variables;
the constraint weights are the square roots of the face areas.  Both the
selection and weighting matrices stay implicit.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from . import _parallel
from .report import SolverReport

__all__ = [
    "AdmmConfig",
    "FaceAdmmState",
    "y_update_edge",
    "g_update_face",
    "face_residuals",
    "admm_face_optimize",
    "face_state_bytes",
]


@dataclass
class AdmmConfig:
    """ADMM settings shared by the face and edge solvers."""

    max_iterations: int = 10
    eps_primal: float = 1e-5
    eps_dual: float = 1e-5
    mu: float = 100.0

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ValueError(f"max_iterations must be a non-negative integer, got {self.max_iterations}")
        for name in ("eps_primal", "eps_dual", "mu"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass
class FaceAdmmState:
    """Solver variables; rows ``2 j`` and ``2 j + 1`` of ``Y`` and ``Lam`` belong
    to interior edge ``j`` on the side of faces ``face1[j]`` and ``face2[j]``."""

    G: np.ndarray
    Y: np.ndarray
    Lam: np.ndarray
    mu: float
    face1: np.ndarray
    face2: np.ndarray
    area1: np.ndarray
    area2: np.ndarray
    directions: np.ndarray
    primal_history: list = field(default_factory=list)
    dual_history: list = field(default_factory=list)

    @property
    def nbytes(self):
        arrays = (self.G, self.Y, self.Lam, self.directions)
        return int(sum(a.nbytes for a in arrays))


def y_update_edge(q1, q2, A1, A2, e):
    """Closest pair ``(y1, y2)`` to ``(q1, q2)`` in the ``A``-weighted norm with
    ``e . (y1 - y2) = 0``.  Broadcasts over leading axes."""
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    A1 = np.asarray(A1, dtype=np.float64)[..., None]
    A2 = np.asarray(A2, dtype=np.float64)[..., None]
    s = np.sum(e * (q2 - q1), axis=-1, keepdims=True)
    y1 = q1 + (A2 / (A1 + A2)) * e * s
    y2 = q2 - (A1 / (A1 + A2)) * e * s
    return y1, y2


def g_update_face(h, ys, lams, alpha, mu):
    """Minimiser of ``A |g - h|^2 + mu/2 sum_k |alpha (y_k - g) + lam_k / mu|^2``
    with ``A = alpha**2``; ``ys`` and ``lams`` have shape ``(k, 3)``, k in 0..3."""
    h = np.asarray(h, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64).reshape(-1, 3)
    lams = np.asarray(lams, dtype=np.float64).reshape(-1, 3)
    total = np.sum(ys + lams / (mu * alpha), axis=0)
    return (2.0 * h + mu * total) / (2.0 + mu * ys.shape[0])


def face_residuals(state, delta_G):
    """Primal and dual residual norms of the current state.

    primal = ``|M (Y - S G)|``, dual = ``mu |M S dG|`` with ``M`` the
    per-slot square-root face areas.
    """
    G, Y = state.G, state.Y
    r1 = Y[0::2] - G[state.face1]
    r2 = Y[1::2] - G[state.face2]
    primal = np.sqrt(
        np.sum(state.area1 * np.sum(r1 * r1, axis=1)) + np.sum(state.area2 * np.sum(r2 * r2, axis=1))
    )
    d1 = delta_G[state.face1]
    d2 = delta_G[state.face2]
    dual = state.mu * np.sqrt(
        np.sum(state.area1 * np.sum(d1 * d1, axis=1)) + np.sum(state.area2 * np.sum(d2 * d2, axis=1))
    )
    return float(primal), float(dual)


def face_state_bytes(n_faces, n_interior_edges, float_bytes=8):
    """Minimum face-solver storage: two vectors per face, five per interior edge."""
    return (6 * n_faces + 15 * n_interior_edges) * float_bytes


def _face_iteration(G, G_prev, H, Y, Lam, face1, face2, area1, area2, direction,
                    face_slot, alpha, mu, primal_terms, dual_terms, face_area):
    n_int = face1.shape[0]
    n_faces = G.shape[0]
    for j in prange(n_int):
        i1 = face1[j]
        i2 = face2[j]
        c1 = 1.0 / (mu * alpha[i1])
        c2 = 1.0 / (mu * alpha[i2])
        s = 0.0
        for c in range(3):
            q1 = G[i1, c] - Lam[2 * j, c] * c1
            q2 = G[i2, c] - Lam[2 * j + 1, c] * c2
            Y[2 * j, c] = q1
            Y[2 * j + 1, c] = q2
            s += direction[j, c] * (q2 - q1)
        w1 = area2[j] / (area1[j] + area2[j])
        w2 = area1[j] / (area1[j] + area2[j])
        for c in range(3):
            Y[2 * j, c] += w1 * direction[j, c] * s
            Y[2 * j + 1, c] -= w2 * direction[j, c] * s

    for f in prange(n_faces):
        inv = 1.0 / (mu * alpha[f])
        count = 0
        t0 = 0.0
        t1 = 0.0
        t2 = 0.0
        for k in range(3):
            slot = face_slot[f, k]
            if slot >= 0:
                count += 1
                t0 += Y[slot, 0] + Lam[slot, 0] * inv
                t1 += Y[slot, 1] + Lam[slot, 1] * inv
                t2 += Y[slot, 2] + Lam[slot, 2] * inv
        den = 2.0 + mu * count
        g0 = (2.0 * H[f, 0] + mu * t0) / den
        g1 = (2.0 * H[f, 1] + mu * t1) / den
        g2 = (2.0 * H[f, 2] + mu * t2) / den
        d0 = g0 - G[f, 0]
        d1 = g1 - G[f, 1]
        d2 = g2 - G[f, 2]
        G_prev[f, 0] = G[f, 0]
        G_prev[f, 1] = G[f, 1]
        G_prev[f, 2] = G[f, 2]
        G[f, 0] = g0
        G[f, 1] = g1
        G[f, 2] = g2
        dual_terms[f] = count * face_area[f] * (d0 * d0 + d1 * d1 + d2 * d2)

    for j in prange(n_int):
        i1 = face1[j]
        i2 = face2[j]
        acc1 = 0.0
        acc2 = 0.0
        for c in range(3):
            r1 = Y[2 * j, c] - G[i1, c]
            r2 = Y[2 * j + 1, c] - G[i2, c]
            Lam[2 * j, c] += mu * alpha[i1] * r1
            Lam[2 * j + 1, c] += mu * alpha[i2] * r2
            acc1 += r1 * r1
            acc2 += r2 * r2
        primal_terms[j] = area1[j] * acc1 + area2[j] * acc2


_face_iteration_parallel = njit(parallel=True, cache=True)(_face_iteration)
_face_iteration_serial = njit(cache=True)(_face_iteration)


def _face_slots(mesh, interior):
    slot = np.full((mesh.n_faces, 3), -1, dtype=np.int64)
    j = np.arange(interior.size)
    h1 = mesh.edge_halfedges[interior, 0]
    h2 = mesh.edge_halfedges[interior, 1]
    slot[h1 // 3, h1 % 3] = 2 * j
    slot[h2 // 3, h2 % 3] = 2 * j + 1
    return slot


def init_face_state(mesh, H, mu):
    """Starting point: ``G = H``, every auxiliary gradient equal to its face's
    target, duals zero."""
    H = np.ascontiguousarray(H, dtype=np.float64)
    interior = np.flatnonzero(mesh.interior_edge_mask)
    face1 = mesh.edge_faces[interior, 0]
    face2 = mesh.edge_faces[interior, 1]
    Y = np.empty((2 * interior.size, 3))
    Y[0::2] = H[face1]
    Y[1::2] = H[face2]
    direction = mesh.edge_vectors[interior] / mesh.edge_lengths[interior, None]
    return FaceAdmmState(
        G=H.copy(),
        Y=Y,
        Lam=np.zeros_like(Y),
        mu=float(mu),
        face1=face1,
        face2=face2,
        area1=mesh.face_areas[face1],
        area2=mesh.face_areas[face2],
        directions=np.ascontiguousarray(direction),
    ), interior


def admm_face_optimize(mesh, H, config=None, return_state=False):
    """Correct the target field ``H`` into an (approximately) integrable field.

    Iterates Y-update, G-update and dual ascent until
    ``primal <= |M|_F eps_primal`` and ``dual <= |M|_F eps_dual`` or
    ``config.max_iterations`` is reached.

    Returns
    -------
    G : ndarray, shape (n_faces, 3)
    report : SolverReport
    state : FaceAdmmState, only when ``return_state`` is true
    """
    config = config or AdmmConfig()
    start = time.perf_counter()
    H = np.ascontiguousarray(H, dtype=np.float64)
    mu = float(config.mu)
    state, interior = init_face_state(mesh, H, mu)
    slot = _face_slots(mesh, interior)
    alpha = np.sqrt(mesh.face_areas)
    m_frob = float(np.sqrt(np.sum(state.area1 + state.area2)))
    primal_tol = m_frob * config.eps_primal
    dual_tol = m_frob * config.eps_dual

    G_prev = np.empty_like(state.G)
    primal_terms = np.empty(interior.size)
    dual_terms = np.empty(mesh.n_faces)
    kernel = _face_iteration_serial if _parallel.is_sequential() else _face_iteration_parallel

    converged = False
    it = 0
    for it in range(1, int(config.max_iterations) + 1):
        kernel(state.G, G_prev, H, state.Y, state.Lam, state.face1, state.face2,
               state.area1, state.area2, state.directions, slot, alpha, mu,
               primal_terms, dual_terms, mesh.face_areas)
        primal = float(np.sqrt(np.sum(primal_terms)))
        dual = mu * float(np.sqrt(np.sum(dual_terms)))
        state.primal_history.append(primal)
        state.dual_history.append(dual)
        if primal <= primal_tol and dual <= dual_tol:
            converged = True
            break

    allocated = state.nbytes + H.nbytes + G_prev.nbytes + slot.nbytes + alpha.nbytes
    allocated += primal_terms.nbytes + dual_terms.nbytes
    report = SolverReport(
        method="face",
        iterations=it,
        converged=converged,
        primal_history=list(state.primal_history),
        dual_history=list(state.dual_history),
        primal_tol=primal_tol,
        dual_tol=dual_tol,
        wall_time=time.perf_counter() - start,
        state_bytes=face_state_bytes(mesh.n_faces, interior.size),
        allocated_bytes=int(allocated),
    )
    if return_state:
        return state.G, report, state
    return state.G, report
