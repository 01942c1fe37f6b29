"""Input checks shared by the estimator and the command line."""

import numbers

import numpy as np

from .mesh import TriMesh

__all__ = ["check_mesh", "check_sources", "check_positive", "check_count"]


def check_mesh(mesh):
    """Return a ``TriMesh`` from a mesh or a ``(vertices, faces)`` pair."""
    if isinstance(mesh, TriMesh):
        return mesh
    if isinstance(mesh, (tuple, list)) and len(mesh) == 2:
        return TriMesh(*mesh)
    raise TypeError(f"expected a TriMesh or a (vertices, faces) pair, got {type(mesh).__name__}")


def check_sources(sources, mesh):
    """Unique, sorted int64 source indices.

    Raises
    ------
    ValueError
        Empty input, non-integer values, or a source with no incident face
        (an isolated vertex cannot carry heat anywhere).
    IndexError
        Index outside ``[0, n_vertices)``.
    """
    arr = np.asarray(sources)
    if arr.dtype == bool:
        raise ValueError("sources must be vertex indices, not a mask")
    arr = arr.reshape(-1)
    if arr.size == 0:
        raise ValueError("at least one source vertex is required")
    if not np.issubdtype(arr.dtype, np.integer):
        as_float = arr.astype(np.float64)
        if not np.all(np.isfinite(as_float)) or np.any(as_float != np.round(as_float)):
            raise ValueError(f"source indices must be integers, got {arr.tolist()}")
    idx = np.unique(arr.astype(np.int64))
    n = mesh.n_vertices
    bad = idx[(idx < 0) | (idx >= n)]
    if bad.size:
        raise IndexError(f"source index {int(bad[0])} out of range for {n} vertices")
    isolated = idx[mesh.vertex_degree[idx] == 0]
    if isolated.size:
        raise ValueError(f"source vertex {int(isolated[0])} has no incident face")
    return idx


def check_positive(name, value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be finite and > 0, got {value!r}")
    return float(value)


def check_count(name, value, minimum=0):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
