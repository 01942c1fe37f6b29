"""Indexed triangle mesh with halfedge connectivity and cached geometry.

Halfedge ``3 * f + k`` belongs to face ``f`` and runs from ``faces[f, k]`` to
``faces[f, (k + 1) % 3]``.  Every undirected edge is oriented from its smaller
to its larger vertex index; the halfedge running that way (when it exists) is
the edge's orientation halfedge, and all signed edge quantities in the package
follow this convention.
"""

import numpy as np
from scipy import sparse

__all__ = [
    "MeshError",
    "TriMesh",
    "cotan_weights",
    "face_gradient",
    "average_edge_length",
    "triangulation_quality",
    "subdivide",
]

DEGENERATE_AREA_FACTOR = 1e-14


class MeshError(ValueError):
    """Raised when input does not describe a valid manifold triangle mesh."""


class TriMesh:
    """Manifold triangle mesh with precomputed geometry.

    Parameters
    ----------
    vertices : array_like, shape (n_vertices, 3)
        Vertex positions.
    faces : array_like, shape (n_faces, 3)
        Counter-clockwise vertex-index triples (0-based).

    Attributes
    ----------
    edges : ndarray, shape (n_edges, 2)
        Vertex pairs ``(i, j)`` with ``i < j``.
    edge_halfedges : ndarray, shape (n_edges, 2)
        Halfedge running ``i -> j`` (column 0) and ``j -> i`` (column 1), or -1.
    edge_faces : ndarray, shape (n_edges, 2)
        Faces of the two halfedges above, or -1.
    face_edges : ndarray, shape (n_faces, 3)
        Edge of halfedge ``3 * f + k``.
    face_edge_signs : ndarray of int8, shape (n_faces, 3)
        +1 when the face traverses that edge along its orientation, else -1.
    halfedge_twin : ndarray, shape (3 * n_faces,)
        Opposite halfedge, -1 on the boundary.
    halfedge_cot : ndarray, shape (n_faces, 3)
        Cotangent of the angle opposite halfedge ``3 * f + k``.
    edge_weights : ndarray, shape (n_edges,)
        Cotangent Laplacian coefficient ``(cot a + cot b) / 2``.
    face_areas, face_normals, vertex_areas : ndarray
        Triangle areas, unit normals and one-third lumped vertex areas.
    """

    def __init__(self, vertices, faces):
        V = np.ascontiguousarray(vertices, dtype=np.float64)
        F = np.asarray(faces)
        if V.ndim != 2 or V.shape[1] != 3:
            raise MeshError(f"vertices must have shape (n, 3), got {V.shape}")
        if F.size == 0:
            F = np.zeros((0, 3), dtype=np.int64)
        if F.ndim != 2 or F.shape[1] != 3:
            raise MeshError(f"faces must have shape (n, 3), got {F.shape}")
        if not np.issubdtype(F.dtype, np.integer):
            if not np.all(np.mod(F, 1) == 0):
                raise MeshError("face indices must be integers")
        F = np.ascontiguousarray(F, dtype=np.int64)
        if not np.all(np.isfinite(V)):
            raise MeshError("vertex positions must be finite")
        nv = V.shape[0]
        if F.size and (F.min() < 0 or F.max() >= nv):
            raise MeshError(f"face index out of range [0, {nv})")
        repeated = (F[:, 0] == F[:, 1]) | (F[:, 1] == F[:, 2]) | (F[:, 2] == F[:, 0])
        if np.any(repeated):
            f = int(np.flatnonzero(repeated)[0])
            raise MeshError(f"degenerate face {f}: repeated vertex in {F[f].tolist()}")

        self.vertices = V
        self.faces = F
        self._build_geometry()
        self._build_connectivity()
        self._build_laplacian()

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------
    def _build_geometry(self):
        V, F = self.vertices, self.faces
        p0, p1, p2 = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
        cross = np.cross(p1 - p0, p2 - p0)
        double_area = np.linalg.norm(cross, axis=1)
        areas = 0.5 * double_area

        if V.shape[0]:
            diag2 = float(np.sum((V.max(axis=0) - V.min(axis=0)) ** 2))
        else:
            diag2 = 0.0
        threshold = DEGENERATE_AREA_FACTOR * diag2
        bad = areas <= threshold
        if np.any(bad):
            f = int(np.flatnonzero(bad)[0])
            raise MeshError(
                f"degenerate face {f}: area {areas[f]:.3e} below {threshold:.3e}"
            )

        self.face_areas = areas
        self.face_normals = cross / double_area[:, None]

        vertex_areas = np.zeros(V.shape[0])
        for k in range(3):
            np.add.at(vertex_areas, F[:, k], areas / 3.0)
        self.vertex_areas = vertex_areas

        # halfedge k of a face is opposite corner (k + 2) % 3
        corners = (p0, p1, p2)
        cot = np.empty((F.shape[0], 3))
        for k in range(3):
            apex = corners[(k + 2) % 3]
            a = corners[k] - apex
            b = corners[(k + 1) % 3] - apex
            cot[:, k] = np.einsum("ij,ij->i", a, b) / double_area
        self.halfedge_cot = cot

    def _build_connectivity(self):
        F = self.faces
        nv, nf = self.vertices.shape[0], F.shape[0]
        tail = F.reshape(-1)
        head = np.roll(F, -1, axis=1).reshape(-1)
        self.halfedge_tail = tail
        self.halfedge_head = head

        lo = np.minimum(tail, head)
        hi = np.maximum(tail, head)
        key = lo * nv + hi
        uniq, he_edge, counts = np.unique(key, return_inverse=True, return_counts=True)
        he_edge = he_edge.reshape(-1)
        if np.any(counts > 2):
            e = int(np.flatnonzero(counts > 2)[0])
            i, j = divmod(int(uniq[e]), nv)
            raise MeshError(f"non-manifold edge ({i}, {j}) with {counts[e]} faces")

        ne = uniq.shape[0]
        edges = np.stack([uniq // nv, uniq % nv], axis=1).astype(np.int64)
        forward = tail < head
        edge_halfedges = np.full((ne, 2), -1, dtype=np.int64)
        hes = np.arange(3 * nf)
        for column, mask in ((0, forward), (1, ~forward)):
            selected = he_edge[mask]
            vals, cnt = np.unique(selected, return_counts=True)
            if np.any(cnt > 1):
                e = int(vals[cnt > 1][0])
                raise MeshError(
                    f"inconsistent winding across edge {tuple(edges[e].tolist())}"
                )
            edge_halfedges[selected, column] = hes[mask]

        twin = np.full(3 * nf, -1, dtype=np.int64)
        both = (edge_halfedges[:, 0] >= 0) & (edge_halfedges[:, 1] >= 0)
        twin[edge_halfedges[both, 0]] = edge_halfedges[both, 1]
        twin[edge_halfedges[both, 1]] = edge_halfedges[both, 0]

        edge_faces = np.where(edge_halfedges >= 0, edge_halfedges // 3, -1)

        self.edges = edges
        self.halfedge_edge = he_edge
        self.halfedge_twin = twin
        self.edge_halfedges = edge_halfedges
        self.edge_faces = edge_faces
        self.face_edges = he_edge.reshape(nf, 3)
        self.face_edge_signs = np.where(forward, 1, -1).astype(np.int8).reshape(nf, 3)
        self.interior_edge_mask = both
        self.boundary_edge_mask = ~both
        boundary_vertices = np.zeros(nv, dtype=bool)
        boundary_vertices[edges[~both].reshape(-1)] = True
        self.boundary_vertex_mask = boundary_vertices

        vec = self.vertices[edges[:, 1]] - self.vertices[edges[:, 0]]
        self.edge_vectors = vec
        self.edge_lengths = np.linalg.norm(vec, axis=1)

    def _build_laplacian(self):
        nv = self.vertices.shape[0]
        w = np.zeros(self.n_edges)
        # fixed accumulation order: orientation side first
        for column in (0, 1):
            h = self.edge_halfedges[:, column]
            has = h >= 0
            w[has] += 0.5 * self.halfedge_cot.reshape(-1)[h[has]]
        self.edge_weights = w

        i, j = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        vals = np.concatenate([w, w])
        adj = sparse.csr_matrix((vals, (rows, cols)), shape=(nv, nv))
        adj.sort_indices()
        self.adjacency = adj

    # ------------------------------------------------------------------
    # sizes and helpers
    # ------------------------------------------------------------------
    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def n_interior_edges(self):
        return int(self.interior_edge_mask.sum())

    @property
    def is_closed(self):
        return not bool(self.boundary_edge_mask.any())

    @property
    def total_area(self):
        return float(self.face_areas.sum())

    @property
    def vertex_degree(self):
        return np.diff(self.adjacency.indptr)

    def edge_index(self, i, j):
        """Index of the edge joining vertices ``i`` and ``j``."""
        a, b = min(i, j), max(i, j)
        lo = np.searchsorted(self.edges[:, 0], a, side="left")
        hi = np.searchsorted(self.edges[:, 0], a, side="right")
        k = lo + np.searchsorted(self.edges[lo:hi, 1], b)
        if k >= hi or self.edges[k, 1] != b:
            raise KeyError(f"no edge between {i} and {j}")
        return int(k)

    def edges_between(self, i, j):
        """Vectorised edge lookup; raises ``KeyError`` if a pair is not an edge."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        nv = self.n_vertices
        keys = self.edges[:, 0] * nv + self.edges[:, 1]
        query = np.minimum(i, j) * nv + np.maximum(i, j)
        pos = np.searchsorted(keys, query)
        pos = np.minimum(pos, max(len(keys) - 1, 0))
        if query.size and not np.all(keys[pos] == query):
            raise KeyError("vertex pair is not an edge")
        return pos

    def laplacian(self):
        """Cotangent Laplacian ``L_c`` as a sparse matrix (negative semidefinite)."""
        diag = np.asarray(self.adjacency.sum(axis=1)).ravel()
        return (self.adjacency - sparse.diags(diag)).tocsr()

    def __repr__(self):
        return (
            f"TriMesh(n_vertices={self.n_vertices}, n_edges={self.n_edges}, "
            f"n_faces={self.n_faces})"
        )


def cotan_weights(mesh):
    """Per-halfedge cotangent of the opposite angle, shape ``(3 * n_faces,)``.

    The symmetric per-edge Laplacian coefficients are ``mesh.edge_weights``.
    """
    return mesh.halfedge_cot.reshape(-1).copy()


def face_gradient(mesh, u):
    """Gradient of the piecewise-linear interpolant of ``u`` on every face.

    Returns an ``(n_faces, 3)`` array; each row lies in its face's plane.
    """
    u = np.asarray(u, dtype=np.float64)
    return corner_gradient(mesh, u[mesh.faces])


def corner_gradient(mesh, values):
    """Face gradients from per-corner values, shape ``(n_faces, 3)``."""
    V, F = mesh.vertices, mesh.faces
    n = mesh.face_normals
    grad = np.zeros((mesh.n_faces, 3))
    for k in range(3):
        # edge opposite corner k, in counter-clockwise order
        e = V[F[:, (k + 2) % 3]] - V[F[:, (k + 1) % 3]]
        grad += values[:, k][:, None] * np.cross(n, e)
    grad /= (2.0 * mesh.face_areas)[:, None]
    return grad


def average_edge_length(mesh):
    """Arithmetic mean of the edge lengths."""
    if mesh.n_edges == 0:
        raise MeshError("mesh has no edges")
    return float(mesh.edge_lengths.mean())


def triangulation_quality(mesh):
    """Mean of ``2 * sqrt(3) * inradius / longest edge`` over faces; 1 is equilateral."""
    if mesh.n_faces == 0:
        raise MeshError("mesh has no faces")
    lengths = mesh.edge_lengths[mesh.face_edges]
    semi = 0.5 * lengths.sum(axis=1)
    inradius = mesh.face_areas / semi
    return float(np.mean(2.0 * np.sqrt(3.0) * inradius / lengths.max(axis=1)))


def subdivide(mesh, levels=1):
    """Midpoint 1-to-4 subdivision, repeated ``levels`` times.

    New vertices sit at exact edge midpoints and are appended after the
    existing ones, so original vertex indices are preserved.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    current = mesh
    for _ in range(levels):
        V, F = current.vertices, current.faces
        nv = V.shape[0]
        mid = 0.5 * (V[current.edges[:, 0]] + V[current.edges[:, 1]])
        fe = current.face_edges + nv
        a, b, c = F[:, 0], F[:, 1], F[:, 2]
        ab, bc, ca = fe[:, 0], fe[:, 1], fe[:, 2]
        F = np.stack(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ],
            axis=1,
        ).reshape(-1, 3)
        current = TriMesh(np.vstack([V, mid]), F)
    if current is mesh:
        return TriMesh(mesh.vertices.copy(), mesh.faces.copy())
    return current
