"""Heat-method geodesic distances on triangle meshes.

The pipeline diffuses heat by breadth-first Gauss-Seidel sweeps, corrects the
normalised heat gradient into an integrable field by ADMM (per-face gradients
or per-edge differences), then integrates it outward from the sources.
"""

from . import _parallel  # noqa: F401  (configures numba before any kernel import)
from .datasets import make_disk, make_equilateral, make_grid, make_icosphere, make_square, make_strip
from .diffusion import (
    DiffusionConfig,
    diffusion_residual,
    diffusion_time,
    gradient_field_error,
    gs_diffuse,
    normalized_target_gradients,
)
from .edge_admm import admm_edge_optimize, edge_state_bytes, solver_state_bytes
from .estimator import HeatGeodesic, SolverError
from .face_admm import AdmmConfig, admm_face_optimize, face_state_bytes
from .integrate import integrate_edge_differences, integrate_face_gradients
from .io import MeshParseError, load_mesh, save_mesh
from .levels import BfsLevels, bfs_levels
from .mesh import MeshError, TriMesh, average_edge_length, subdivide, triangulation_quality
from .reference import (
    analytic_oracle,
    cg_solve,
    dijkstra_edge_distance,
    mean_relative_error,
    poisson_heat_method,
    recovery_error,
)
from .report import RunReport, SolverReport

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "BfsLevels",
    "DiffusionConfig",
    "HeatGeodesic",
    "MeshError",
    "MeshParseError",
    "RunReport",
    "SolverError",
    "SolverReport",
    "TriMesh",
    "admm_edge_optimize",
    "admm_face_optimize",
    "analytic_oracle",
    "average_edge_length",
    "bfs_levels",
    "cg_solve",
    "diffusion_residual",
    "diffusion_time",
    "dijkstra_edge_distance",
    "edge_state_bytes",
    "face_state_bytes",
    "gradient_field_error",
    "gs_diffuse",
    "integrate_edge_differences",
    "integrate_face_gradients",
    "load_mesh",
    "make_disk",
    "make_equilateral",
    "make_grid",
    "make_icosphere",
    "make_square",
    "make_strip",
    "mean_relative_error",
    "normalized_target_gradients",
    "poisson_heat_method",
    "recovery_error",
    "save_mesh",
    "solver_state_bytes",
    "subdivide",
    "triangulation_quality",
]
