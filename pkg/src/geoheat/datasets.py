"""Synthetic test meshes with known geodesic distances."""

import numpy as np

from .mesh import TriMesh, subdivide

__all__ = [
    "make_square",
    "make_grid",
    "make_strip",
    "make_disk",
    "make_icosphere",
    "make_equilateral",
]


def make_square():
    """Unit square split along the diagonal (0,0)-(1,1)."""
    V = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    F = np.array([[0, 1, 2], [0, 2, 3]])
    return TriMesh(V, F)


def make_equilateral(side=1.0):
    V = np.array([[0.0, 0.0, 0.0], [side, 0.0, 0.0], [0.5 * side, 0.5 * np.sqrt(3) * side, 0.0]])
    return TriMesh(V, np.array([[0, 1, 2]]))


def make_grid(nx, ny, width=1.0, height=1.0):
    """Regular ``nx`` by ``ny`` cell grid, each cell split along its diagonal."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    V = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    F = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    return TriMesh(V, F)


def make_strip(n=40, length=4.0, width=0.2):
    """Long thin grid along +x, ``n`` cells long and 2 cells wide."""
    return make_grid(n, 2, width=length, height=width)


def make_disk(n_rings, radius=1.0):
    """Flat disk of concentric rings, ring ``k`` carrying ``6 k`` vertices.

    Vertex 0 is the centre.  Adjacent rings are stitched by merging their
    angular orders with exact integer comparisons, which keeps the mesh
    invariant under rotation by 60 degrees.
    """
    if n_rings < 1:
        raise ValueError("n_rings must be >= 1")
    pts = [np.zeros(3)]
    start = [0]
    for k in range(1, n_rings + 1):
        start.append(len(pts))
        ang = 2.0 * np.pi * np.arange(6 * k) / (6 * k)
        r = radius * k / n_rings
        for a in ang:
            pts.append(np.array([r * np.cos(a), r * np.sin(a), 0.0]))
    start.append(len(pts))
    faces = [[0, 1 + i, 1 + (i + 1) % 6] for i in range(6)]
    for k in range(1, n_rings):
        n_in, n_out = 6 * k, 6 * (k + 1)
        s_in, s_out = start[k], start[k + 1]
        i = j = 0
        while i < n_in or j < n_out:
            # compare next angles (i+1)/n_in and (j+1)/n_out exactly
            advance_inner = (i + 1) * n_out < (j + 1) * n_in
            if j == n_out:
                advance_inner = True
            elif i == n_in:
                advance_inner = False
            a = s_in + i % n_in
            b = s_out + j % n_out
            if advance_inner:
                faces.append([a, b, s_in + (i + 1) % n_in])
                i += 1
            else:
                faces.append([a, b, s_out + (j + 1) % n_out])
                j += 1
    return TriMesh(np.array(pts), np.array(faces))


def make_icosphere(subdivisions, radius=1.0):
    """Icosahedron subdivided ``subdivisions`` times and projected to the sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    V = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    F = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    V = radius * V / np.linalg.norm(V, axis=1, keepdims=True)
    mesh = TriMesh(V, F)
    for _ in range(subdivisions):
        mesh = subdivide(mesh, 1)
        P = mesh.vertices
        mesh = TriMesh(radius * P / np.linalg.norm(P, axis=1, keepdims=True), mesh.faces)
    return mesh
