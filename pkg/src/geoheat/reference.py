"""Independent baselines and error measures.

The Poisson-based heat method here shares no solver code with the
Gauss-Seidel/ADMM pipeline.  Its Poisson system is always solved with a
Jacobi-preconditioned conjugate gradient.  The heat system defaults to a sparse
LU factorisation: heat values far from the source fall many orders of magnitude
below the residual floor of a relative-tolerance CG, which then returns a
visibly wrong far-field gradient direction.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu

from .diffusion import heat_source_vector
from .mesh import corner_gradient

__all__ = [
    "CGResult",
    "ConvergenceError",
    "cg_solve",
    "heat_matrix",
    "integrated_divergence",
    "poisson_heat_method",
    "dijkstra_edge_distance",
    "euclidean_distance",
    "great_circle_distance",
    "analytic_oracle",
    "mean_relative_error",
    "recovery_error",
]


class ConvergenceError(RuntimeError):
    """CG hit non-finite values or a zero-curvature direction."""


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    converged: bool
    residual_history: list = field(default_factory=list)


def _as_operator(operator):
    if callable(operator) and not sparse.issparse(operator) and not isinstance(operator, np.ndarray):
        return operator, None
    mat = operator
    return (lambda v: mat @ v), np.asarray(mat.diagonal(), dtype=np.float64)


def cg_solve(operator, rhs, tol=1e-10, max_iters=None, diagonal=None, x0=None):
    """Jacobi-preconditioned conjugate gradient.

    Parameters
    ----------
    operator : sparse matrix, ndarray or callable
        Symmetric positive definite map.  A callable needs ``diagonal`` for
        preconditioning; without it the preconditioner is the identity.
    rhs : ndarray
    tol : float
        Stop once ``|r| <= tol * |rhs|``.
    max_iters : int, optional
        Defaults to ``10 * len(rhs)``.

    Returns
    -------
    CGResult
        ``residual_history`` holds the preconditioned residual norms
        ``sqrt(r . M^-1 r)``.
    """
    apply, diag = _as_operator(operator)
    if diagonal is not None:
        diag = np.asarray(diagonal, dtype=np.float64)
    b = np.asarray(rhs, dtype=np.float64)
    n = b.shape[0]
    if max_iters is None:
        max_iters = 10 * max(n, 1)
    if diag is None:
        inv_diag = np.ones(n)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_diag = 1.0 / diag
    if not np.all(np.isfinite(inv_diag)):
        raise ConvergenceError("preconditioner diagonal has zero entries")

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - apply(x) if x0 is not None else b.copy()
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        return CGResult(np.zeros(n), 0, True, [0.0])
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    history = [np.sqrt(max(rz, 0.0))]
    if np.linalg.norm(r) <= tol * b_norm:
        return CGResult(x, 0, True, history)
    for k in range(1, max_iters + 1):
        Ap = apply(p)
        curvature = float(p @ Ap)
        if not np.isfinite(curvature):
            raise ConvergenceError(f"non-finite value at iteration {k}")
        if curvature <= 0:
            raise ConvergenceError(f"zero or negative curvature at iteration {k}")
        a = rz / curvature
        x += a * p
        r -= a * Ap
        z = inv_diag * r
        rz_new = float(r @ z)
        history.append(np.sqrt(max(rz_new, 0.0)))
        if np.linalg.norm(r) <= tol * b_norm:
            return CGResult(x, k, True, history)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return CGResult(x, max_iters, False, history)


def heat_matrix(mesh, t):
    """Sparse ``A - t L_c``."""
    return (sparse.diags(mesh.vertex_areas) - t * mesh.laplacian()).tocsr()


def integrated_divergence(mesh, X):
    """Per-vertex integrated divergence of a face field.

    ``b_i = 1/2 sum_f (cot a1 (e1 . X_f) + cot a2 (e2 . X_f))`` where ``e1, e2``
    leave vertex ``i`` inside face ``f`` and ``a1, a2`` are the angles facing
    them.
    """
    X = np.asarray(X, dtype=np.float64)
    V, F = mesh.vertices, mesh.faces
    cot = mesh.halfedge_cot
    b = np.zeros(mesh.n_vertices)
    for k in range(3):
        i = F[:, k]
        j = F[:, (k + 1) % 3]
        l = F[:, (k + 2) % 3]
        e1 = V[j] - V[i]  # halfedge k, opposite corner l
        e2 = V[l] - V[i]  # halfedge (k + 2) % 3 reversed, opposite corner j
        term = cot[:, k] * np.einsum("ij,ij->i", e1, X)
        term += cot[:, (k + 2) % 3] * np.einsum("ij,ij->i", e2, X)
        np.add.at(b, i, 0.5 * term)
    return b


def poisson_heat_method(mesh, sources, t, cg_tol=1e-10, max_iters=None, heat_solver="direct",
                        return_info=False):
    """Heat method with a reduced Poisson solve by CG.

    Parameters
    ----------
    heat_solver : {"direct", "cg"}
        ``"cg"`` solves the heat system by CG at ``cg_tol`` as well.
    return_info : bool
        Also return a dict with the CG results, ``u`` and the unit field ``X``.

    The Poisson system drops the source rows and columns (their distance is
    fixed at 0), which makes it positive definite.
    """
    sources = np.unique(np.asarray(sources, dtype=np.int64).reshape(-1))
    M = heat_matrix(mesh, t)
    u0 = heat_source_vector(mesh.n_vertices, sources)
    if heat_solver == "cg":
        heat = cg_solve(M, u0, tol=cg_tol, max_iters=max_iters)
        if not heat.converged:
            warnings.warn("heat CG did not reach the tolerance", RuntimeWarning)
    elif heat_solver == "direct":
        x = splu(M.tocsc()).solve(u0)
        heat = CGResult(x, 0, True, [float(np.linalg.norm(M @ x - u0))])
    else:
        raise ValueError(f"heat_solver must be 'direct' or 'cg', got {heat_solver!r}")
    # the direction is scale-free, so rescale each face to avoid underflow
    corner = heat.x[mesh.faces]
    peak = np.abs(corner).max(axis=1)
    peak[peak == 0] = 1.0
    grad = corner_gradient(mesh, corner / peak[:, None])
    norm = np.linalg.norm(grad, axis=1)
    X = np.zeros_like(grad)
    ok = norm > 0
    X[ok] = -grad[ok] / norm[ok, None]
    b = integrated_divergence(mesh, X)

    keep = np.ones(mesh.n_vertices, dtype=bool)
    keep[sources] = False
    K = (-mesh.laplacian()).tocsr()[keep][:, keep]
    poisson = cg_solve(K, -b[keep], tol=cg_tol, max_iters=max_iters)
    if not poisson.converged:
        warnings.warn("Poisson CG did not reach the tolerance", RuntimeWarning)
    d = np.zeros(mesh.n_vertices)
    d[keep] = poisson.x
    if return_info:
        return d, {"heat": heat, "poisson": poisson, "u": heat.x, "X": X}
    return d


def dijkstra_edge_distance(mesh, sources):
    """Shortest paths along mesh edges with Euclidean edge lengths."""
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    n = mesh.n_vertices
    graph = sparse.csr_matrix((mesh.edge_lengths, (i, j)), shape=(n, n))
    return csgraph.dijkstra(graph, directed=False, indices=np.asarray(sources), min_only=True)


def euclidean_distance(points, sources):
    points = np.asarray(points, dtype=np.float64)
    src = points[np.atleast_1d(sources)]
    diff = points[:, None, :] - src[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2)).min(axis=1)


def great_circle_distance(points, sources, radius=None, center=None):
    points = np.asarray(points, dtype=np.float64)
    center = np.zeros(3) if center is None else np.asarray(center, dtype=np.float64)
    rel = points - center
    r = np.linalg.norm(rel, axis=1)
    if radius is None:
        radius = float(r.mean())
    unit = rel / r[:, None]
    src = unit[np.atleast_1d(sources)]
    cos = np.clip(unit @ src.T, -1.0, 1.0)
    return radius * np.arccos(cos).min(axis=1)


def analytic_oracle(kind, mesh, sources, tol=1e-6):
    """Exact distances on a flat mesh (``"euclid"``) or a sphere (``"sphere"``).

    The mesh must lie on the surface to relative tolerance ``tol``.
    """
    V = mesh.vertices
    scale = float(np.linalg.norm(V.max(axis=0) - V.min(axis=0)))
    if kind in ("euclid", "flat", "plane"):
        c = V.mean(axis=0)
        _, s, vt = np.linalg.svd(V - c, full_matrices=False)
        off = np.abs((V - c) @ vt[-1])
        if off.max() > tol * scale:
            raise ValueError(f"mesh is not planar: max offset {off.max():.3e}")
        return euclidean_distance(V, sources)
    if kind in ("sphere", "great-circle"):
        c = _sphere_center(V)
        r = np.linalg.norm(V - c, axis=1)
        R = float(r.mean())
        if np.abs(r - R).max() > tol * R:
            raise ValueError(f"mesh is not spherical: radius spread {np.ptp(r):.3e}")
        return great_circle_distance(V, sources, radius=R, center=c)
    raise ValueError(f"unknown oracle {kind!r}")


def _sphere_center(V):
    # |p|^2 = 2 c . p + (R^2 - |c|^2) is linear in (c, k)
    A = np.column_stack([2.0 * V, np.ones(len(V))])
    rhs = np.sum(V * V, axis=1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return sol[:3]


def mean_relative_error(d, d_ref, sources, return_excluded=False):
    """Mean of ``|d - d*| / |d*|`` over non-source vertices, divided by the
    total vertex count.  Vertices with ``d* = 0`` outside the sources are
    skipped."""
    d = np.asarray(d, dtype=np.float64)
    d_ref = np.asarray(d_ref, dtype=np.float64)
    mask = np.ones(d.shape[0], dtype=bool)
    mask[np.asarray(sources, dtype=np.int64)] = False
    zero = mask & (d_ref == 0)
    mask &= ~zero
    err = float(np.sum(np.abs(d[mask] - d_ref[mask]) / np.abs(d_ref[mask])) / d.shape[0])
    if return_excluded:
        return err, int(zero.sum())
    return err


def recovery_error(d, d_ref):
    """``|d - d*|_2 / n``."""
    d = np.asarray(d, dtype=np.float64)
    d_ref = np.asarray(d_ref, dtype=np.float64)
    return float(np.linalg.norm(d - d_ref) / d.shape[0])
