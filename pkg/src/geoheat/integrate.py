"""Breadth-first recovery of a distance field from corrected gradients.

Every vertex takes its value from its BFS parent plus the change along the
joining edge, ring by ring.  Increments depend only on the gradient data, so
they are computed for all vertices at once and then accumulated per ring.
"""

import numpy as np

__all__ = ["integrate_face_gradients", "integrate_edge_differences", "accumulate_levels"]


def _parent_edges(mesh, levels):
    child = levels.order[levels.level_ptr[1]:] if levels.n_levels > 1 else np.zeros(0, np.int64)
    parent = levels.parent[child]
    return child, parent, mesh.edges_between(child, parent)


def accumulate_levels(levels, step):
    """``d = 0`` on sources, ``d(v) = d(parent) + step(v)`` ring by ring,
    ``+inf`` where unreachable."""
    d = np.full(levels.level.shape[0], np.inf)
    d[levels.sources] = 0.0
    parent = levels.parent
    for ring in levels.levels[1:]:
        d[ring] = d[parent[ring]] + step[ring]
    return d


def integrate_face_gradients(mesh, levels, G):
    """Integrate a per-face gradient field from the sources.

    The step from parent ``k`` to ``j`` averages ``g_f . (p_j - p_k)`` over
    the one or two faces sharing the edge.
    """
    G = np.asarray(G, dtype=np.float64)
    child, parent, edge = _parent_edges(mesh, levels)
    step = np.zeros(mesh.n_vertices)
    if child.size:
        delta = mesh.vertices[child] - mesh.vertices[parent]
        faces = mesh.edge_faces[edge]
        has = faces >= 0
        assert np.all(has.any(axis=1)), "parent edge without incident face"
        total = np.zeros(child.size)
        for side in (0, 1):
            f = faces[:, side]
            m = has[:, side]
            total[m] += np.einsum("ij,ij->i", G[f[m]], delta[m])
        step[child] = total / has.sum(axis=1)
    return accumulate_levels(levels, step)


def integrate_edge_differences(mesh, levels, X):
    """Integrate per-edge differences ``x_e = d(j) - d(i)`` (``i < j``) from the
    sources along BFS parent edges."""
    X = np.asarray(X, dtype=np.float64)
    child, parent, edge = _parent_edges(mesh, levels)
    step = np.zeros(mesh.n_vertices)
    if child.size:
        sign = np.where(parent < child, 1.0, -1.0)
        step[child] = sign * X[edge]
    return accumulate_levels(levels, step)
