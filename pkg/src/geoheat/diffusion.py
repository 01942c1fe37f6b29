"""Short-time heat diffusion by breadth-first Gauss-Seidel sweeps.

Each sweep updates the rings ``D_0, D_1, ...`` in order.  Vertices of one ring
read the values committed before the ring started (a per-ring double buffer),
so every vertex update is independent of scheduling and the result is the
same for any thread count.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from . import _parallel
from .mesh import average_edge_length, corner_gradient

__all__ = [
    "DiffusionConfig",
    "diffusion_time",
    "heat_source_vector",
    "gs_diffuse",
    "gs_sweep_kernel",
    "normalized_target_gradients",
    "diffusion_residual",
    "gradient_field_error",
    "ZERO_GRADIENT_TOL",
]

ZERO_GRADIENT_TOL = 1e-20
# rings smaller than this are updated serially; the result is identical
PARALLEL_MIN_RING = 256


@dataclass
class DiffusionConfig:
    """Settings for :func:`gs_diffuse`.

    ``m`` scales the diffusion time ``t = m * h**2``; ``tol`` stops early once
    the linear-system residual drops below it (checked every ``check_every``
    sweeps).
    """

    m: float = 1.0
    sweeps: int = 1000
    tol: float | None = None
    check_every: int = 10

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"m must be > 0, got {self.m}")
        if int(self.sweeps) != self.sweeps or self.sweeps < 0:
            raise ValueError(f"sweeps must be a non-negative integer, got {self.sweeps}")
        if self.tol is not None and not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")


def diffusion_time(mesh, m=1.0):
    """``t = m * h**2`` with ``h`` the mean edge length."""
    if not m > 0:
        raise ValueError(f"m must be > 0, got {m}")
    h = average_edge_length(mesh)
    return m * h * h


def heat_source_vector(n_vertices, sources):
    u0 = np.zeros(n_vertices)
    u0[np.asarray(sources, dtype=np.int64)] = 1.0
    return u0


def _gs_sweeps(indptr, indices, weights, denom, u0, t, order, level_ptr, sweeps, u, buf):
    n_levels = level_ptr.shape[0] - 1
    for _ in range(sweeps):
        for lev in range(n_levels):
            start = level_ptr[lev]
            stop = level_ptr[lev + 1]
            if stop - start < PARALLEL_MIN_RING:
                for p in range(start, stop):
                    buf[p] = _gs_value(indptr, indices, weights, denom, u0, t, order[p], u)
                for p in range(start, stop):
                    u[order[p]] = buf[p]
            else:
                for p in prange(start, stop):
                    buf[p] = _gs_value(indptr, indices, weights, denom, u0, t, order[p], u)
                for p in prange(start, stop):
                    u[order[p]] = buf[p]


@njit(cache=True, inline="always")
def _gs_value(indptr, indices, weights, denom, u0, t, v, u):
    acc = 0.0
    for q in range(indptr[v], indptr[v + 1]):
        acc += weights[q] * u[indices[q]]
    return (u0[v] + t * acc) / denom[v]


_gs_sweeps_parallel = njit(parallel=True, cache=True)(_gs_sweeps)
_gs_sweeps_serial = njit(cache=True)(_gs_sweeps)


def gs_sweep_kernel():
    """The sweep kernel matching the current thread budget."""
    return _gs_sweeps_serial if _parallel.is_sequential() else _gs_sweeps_parallel


def gs_diffuse(mesh, levels, t, config=None, u=None, history=None):
    """Solve ``(A - t L_c) u = u0`` approximately by breadth-first Gauss-Seidel.

    Parameters
    ----------
    mesh : TriMesh
    levels : BfsLevels
        Rings built from the diffusion sources; ``u0`` is 1 on them.
    t : float
        Diffusion time.
    config : DiffusionConfig, optional
    u : ndarray, optional
        Warm start; defaults to ``u0``.  Updated in place when given.
    history : list, optional
        Receives ``(sweeps_done, residual)`` pairs when ``config.tol`` is set.

    Returns
    -------
    u : ndarray, shape (n_vertices,)
        Heat values; vertices unreachable from the sources stay 0.
    """
    config = config or DiffusionConfig()
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    adj = mesh.adjacency
    u0 = heat_source_vector(mesh.n_vertices, levels.sources)
    denom = mesh.vertex_areas + t * np.asarray(adj.sum(axis=1)).ravel()
    reach = levels.order
    if not np.all(denom[reach] > 0):
        bad = int(reach[np.flatnonzero(denom[reach] <= 0)[0]])
        raise ValueError(f"vertex {bad} has a non-positive diffusion denominator")
    if u is None:
        u = u0.copy()
    else:
        u = np.ascontiguousarray(u, dtype=np.float64)
    buf = np.empty(reach.shape[0])
    kernel = gs_sweep_kernel()
    args = (adj.indptr, adj.indices, adj.data, denom, u0, float(t), reach, levels.level_ptr)

    sweeps = int(config.sweeps)
    if config.tol is None:
        kernel(*args, sweeps, u, buf)
        return u
    done = 0
    while done < sweeps:
        step = min(config.check_every, sweeps - done)
        kernel(*args, step, u, buf)
        done += step
        res = diffusion_residual(mesh, u, t, levels.sources)
        if history is not None:
            history.append((done, res))
        if res <= config.tol:
            break
    return u


def normalized_target_gradients(mesh, u, return_count=False):
    """Unit target field ``-grad u / |grad u|`` per face.

    The gradient is evaluated on ``u`` rescaled by each face's largest value,
    which leaves its direction unchanged but keeps far-field faces (where the
    heat value is tiny) above the zero-gradient guard.  Faces whose scaled
    gradient is still below ``ZERO_GRADIENT_TOL`` get the zero vector.
    """
    u = np.asarray(u, dtype=np.float64)
    corner = u[mesh.faces]
    scale = np.abs(corner).max(axis=1)
    scale[scale == 0] = 1.0
    grad = corner_gradient(mesh, corner / scale[:, None])
    norm = np.linalg.norm(grad, axis=1)
    zero = ~(norm >= ZERO_GRADIENT_TOL)
    H = np.zeros_like(grad)
    ok = ~zero
    H[ok] = -grad[ok] / norm[ok, None]
    if return_count:
        return H, int(zero.sum())
    return H


def diffusion_residual(mesh, u, t, sources):
    """``|| (A - t L_c) u - u0 ||_2`` evaluated with the sparse Laplacian."""
    u = np.asarray(u, dtype=np.float64)
    adj = mesh.adjacency
    row_sum = np.asarray(adj.sum(axis=1)).ravel()
    lap_u = adj @ u - row_sum * u
    r = mesh.vertex_areas * u - t * lap_u - heat_source_vector(mesh.n_vertices, sources)
    return float(np.linalg.norm(r))


def gradient_field_error(mesh, H, H_ref):
    """Area-weighted RMS difference of two face fields, areas normalised to sum 1."""
    H = np.asarray(H, dtype=np.float64)
    H_ref = np.asarray(H_ref, dtype=np.float64)
    w = mesh.face_areas / mesh.total_area
    return float(np.sqrt(np.sum(w * np.sum((H - H_ref) ** 2, axis=1))))

