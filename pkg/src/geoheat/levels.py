"""Breadth-first vertex rings around a source set."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BfsLevels", "bfs_levels"]


@dataclass(frozen=True)
class BfsLevels:
    """Vertex rings ``D_0, D_1, ...`` and the parent pairing used for integration.

    ``order`` lists reachable vertices level by level and ``level_ptr`` holds
    the ring boundaries, so ring ``i`` is ``order[level_ptr[i]:level_ptr[i+1]]``.
    ``parent`` is -1 for sources and unreachable vertices.
    """

    level: np.ndarray
    order: np.ndarray
    level_ptr: np.ndarray
    parent: np.ndarray
    sources: np.ndarray
    n_unreachable: int = 0
    levels: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rings = [
            self.order[self.level_ptr[i] : self.level_ptr[i + 1]]
            for i in range(len(self.level_ptr) - 1)
        ]
        object.__setattr__(self, "levels", rings)

    @property
    def n_levels(self):
        return len(self.level_ptr) - 1

    @property
    def reachable(self):
        return self.level >= 0


def bfs_levels(mesh, sources):
    """Partition vertices into breadth-first rings around ``sources``.

    Each non-source vertex's parent is its smallest-index neighbour in the
    previous ring.  Vertices not connected to any source get level -1.
    """
    sources = np.unique(np.asarray(sources, dtype=np.int64).reshape(-1))
    nv = mesh.n_vertices
    if sources.size == 0:
        raise ValueError("at least one source vertex is required")
    if sources.min() < 0 or sources.max() >= nv:
        raise IndexError(f"source index out of range [0, {nv})")

    indptr = mesh.adjacency.indptr
    indices = mesh.adjacency.indices
    level = np.full(nv, -1, dtype=np.int64)
    parent = np.full(nv, -1, dtype=np.int64)
    level[sources] = 0
    rings = [sources]
    frontier = sources
    depth = 0
    while frontier.size:
        depth += 1
        starts, stops = indptr[frontier], indptr[frontier + 1]
        counts = stops - starts
        owner = np.repeat(frontier, counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        neigh = indices[np.repeat(starts, counts) + offsets]
        fresh = level[neigh] == -1
        neigh, owner = neigh[fresh], owner[fresh]
        if neigh.size == 0:
            break
        # smallest parent index wins
        sort = np.lexsort((owner, neigh))
        neigh, owner = neigh[sort], owner[sort]
        first = np.ones(neigh.size, dtype=bool)
        first[1:] = neigh[1:] != neigh[:-1]
        ring = neigh[first]
        parent[ring] = owner[first]
        level[ring] = depth
        rings.append(ring)
        frontier = ring

    order = np.concatenate(rings)
    level_ptr = np.concatenate([[0], np.cumsum([r.size for r in rings])]).astype(np.int64)
    return BfsLevels(
        level=level,
        order=order,
        level_ptr=level_ptr,
        parent=parent,
        sources=sources,
        n_unreachable=int(np.sum(level < 0)),
    )
