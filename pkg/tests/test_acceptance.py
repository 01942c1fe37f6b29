"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line that pytest prints in an
"acceptance criteria" section at the end of the run.
"""

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import splu

from geoheat import _parallel
from geoheat.datasets import make_disk, make_grid, make_icosphere
from geoheat.diffusion import (
    DiffusionConfig,
    diffusion_time,
    gradient_field_error,
    gs_diffuse,
    heat_source_vector,
    normalized_target_gradients,
)
from geoheat.edge_admm import (
    admm_edge_optimize,
    edge_state_bytes,
    solver_state_bytes,
    w_update_face,
    x_update_edge,
)
from geoheat.estimator import HeatGeodesic
from geoheat.face_admm import AdmmConfig, admm_face_optimize, face_state_bytes, g_update_face, y_update_edge
from geoheat.integrate import integrate_edge_differences, integrate_face_gradients
from geoheat.levels import bfs_levels
from geoheat.mesh import face_gradient, subdivide, triangulation_quality
from geoheat.reference import (
    analytic_oracle,
    cg_solve,
    dijkstra_edge_distance,
    euclidean_distance,
    heat_matrix,
    mean_relative_error,
    poisson_heat_method,
    recovery_error,
)
from oracles import edge_qp_solution, face_qp_solution, quadratic_minimizer


def _eps(d, mesh, kind, sources):
    return mean_relative_error(d, analytic_oracle(kind, mesh, sources), sources)


@pytest.fixture(scope="module")
def disk_runs(disk10k):
    """Default face, edge and poisson distances on the 10k flat disk."""
    return {m: HeatGeodesic(method=m).fit(disk10k).predict([0]) for m in ("face", "edge", "poisson")}


@pytest.fixture(scope="module")
def sphere_runs(sphere10k):
    return {m: HeatGeodesic(method=m).fit(sphere10k).predict([0]) for m in ("face", "edge")}


# 1 -----------------------------------------------------------------------
def test_c01_planar_accuracy(disk10k, criterion):
    tau = triangulation_quality(disk10k)
    # load the compiled kernels so the timing measures the solve
    HeatGeodesic(threads=1).fit(make_disk(3)).predict([0])
    start = time.perf_counter()
    est = HeatGeodesic(method="face", threads=1).fit(disk10k)
    d = est.predict([0])
    elapsed = time.perf_counter() - start
    eps = _eps(d, disk10k, "euclid", [0])
    r = est.report_
    ok = (9000 <= disk10k.n_vertices <= 11000 and tau >= 0.7 and eps <= 0.02 and elapsed < 5.0
          and (r.m, r.gs_iters, r.admm_iters) == (1.0, 1000, 10))
    criterion("C1 planar accuracy", ok,
              f"|V|={disk10k.n_vertices} tau={tau:.3f} eps={eps:.4%} (<=2%) time={elapsed:.2f}s (<5s, 1 thread)")
    assert ok


# 2 -----------------------------------------------------------------------
def test_c02_spherical_accuracy(sphere10k, sphere_runs, criterion):
    eps = {m: _eps(d, sphere10k, "sphere", [0]) for m, d in sphere_runs.items()}
    ok = all(e <= 0.02 for e in eps.values())
    criterion("C2 spherical accuracy", ok,
              f"|V|={sphere10k.n_vertices} eps face={eps['face']:.4%} edge={eps['edge']:.4%} (<=2%)")
    assert ok


# 3 -----------------------------------------------------------------------
def test_c03_diffusion_convergence(disk5k, criterion):
    mesh = disk5k
    t = diffusion_time(mesh)
    u0 = heat_source_vector(mesh.n_vertices, [0])
    M = heat_matrix(mesh, t)
    cg = cg_solve(M, u0, tol=1e-12)
    H_ref = normalized_target_gradients(mesh, cg.x)
    H_lu = normalized_target_gradients(mesh, splu(M.tocsc()).solve(u0))

    lv = bfs_levels(mesh, [0])
    u = u0.copy()
    best, best_at, first_below, to_lu = np.inf, 0, None, None
    for k in range(10, 501, 10):
        gs_diffuse(mesh, lv, t, DiffusionConfig(sweeps=10), u=u)
        H = normalized_target_gradients(mesh, u)
        E = gradient_field_error(mesh, H, H_ref)
        if E < best:
            best, best_at = E, k
        if first_below is None and E < 0.01:
            first_below = k
        if to_lu is None and gradient_field_error(mesh, H, H_lu) < 0.01:
            to_lu = k
    ok = first_below is not None
    criterion("C3 diffusion convergence", ok,
              f"|V|={mesh.n_vertices} CG(1e-12) {cg.iterations} it; min E={best:.3%} at {best_at} sweeps "
              f"(<1% within 500: {'at ' + str(first_below) if ok else 'never'}); "
              f"E(CG ref, LU ref)={gradient_field_error(mesh, H_ref, H_lu):.3%}; "
              f"vs LU ref E<1% at {to_lu} sweeps")
    assert ok


# 4 -----------------------------------------------------------------------
def test_c04_subproblem_exactness(criterion):
    rng = np.random.default_rng(4)
    worst = {}

    err = 0.0
    for _ in range(100):
        q1, q2 = rng.normal(size=(2, 3))
        A1, A2 = rng.uniform(0.05, 3.0, size=2)
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)

        def f(z):
            return A1 * np.sum((z[:3] - q1) ** 2) + A2 * np.sum((z[3:] - q2) ** 2)

        ref = quadratic_minimizer(f, 6, np.concatenate([e, -e])[None, :])
        y1, y2 = y_update_edge(q1, q2, A1, A2, e)
        err = max(err, np.abs(np.concatenate([y1, y2]) - ref).max())
    worst["y_update_edge"] = err

    err = 0.0
    for _ in range(100):
        k = int(rng.integers(0, 4))
        h = rng.normal(size=3)
        ys, lams = rng.normal(size=(2, k, 3))
        alpha = rng.uniform(0.1, 2.0)
        mu = float(rng.choice([1.0, 10.0, 100.0]))

        def f(g):
            aug = alpha * (ys - g) + lams / mu
            return alpha ** 2 * np.sum((g - h) ** 2) + 0.5 * mu * np.sum(aug * aug)

        err = max(err, np.abs(g_update_face(h, ys, lams, alpha, mu) - quadratic_minimizer(f, 3)).max())
    worst["g_update_face"] = err

    err = 0.0
    for _ in range(100):
        x, lam = rng.normal(size=(2, 3))
        q = rng.choice([-1.0, 1.0], size=3)
        mu = float(rng.choice([1.0, 10.0, 100.0]))

        def f(w):
            return 0.5 * mu * np.sum((w - x + lam / mu) ** 2)

        err = max(err, np.abs(w_update_face(x, lam, q, mu) - quadratic_minimizer(f, 3, q[None, :])).max())
    worst["w_update_face"] = err

    err = 0.0
    for _ in range(100):
        k = int(rng.integers(1, 3))
        h, lam, w = rng.normal(size=(3, k))
        mu = float(rng.choice([1.0, 10.0, 100.0]))

        def f(x):
            return float(np.sum(0.5 * (x[0] - h) ** 2 + 0.5 * mu * (w - x[0] + lam / mu) ** 2))

        err = max(err, abs(x_update_edge(h, lam, w, mu) - quadratic_minimizer(f, 1)[0]))
    worst["x_update_edge"] = err

    ok = all(v <= 1e-6 for v in worst.values())
    criterion("C4 ADMM subproblem exactness", ok,
              "max |closed form - oracle| over 100 inputs: "
              + " ".join(f"{k}={v:.1e}" for k, v in worst.items()) + " (<=1e-6)")
    assert ok


# 5 -----------------------------------------------------------------------
def test_c05_small_instance_optimality(square, criterion):
    rng = np.random.default_rng(5)
    fields = [np.array([[1.0, 0, 0], [0, 1.0, 0]])]
    for _ in range(5):
        H = rng.normal(size=(2, 3))
        H[:, 2] = 0
        fields.append(H / np.linalg.norm(H, axis=1, keepdims=True))
    cfg = AdmmConfig(max_iterations=100000, eps_primal=1e-12, eps_dual=1e-12)
    face_err = edge_err = 0.0
    converged = True
    for H in fields:
        G, rf = admm_face_optimize(square, H, cfg)
        X, re = admm_edge_optimize(square, H, cfg)
        converged &= rf.converged and re.converged
        face_err = max(face_err, np.abs(G - face_qp_solution(square, H)).max())
        edge_err = max(edge_err, np.abs(X - edge_qp_solution(square, H)).max())
    ok = converged and face_err <= 1e-6 and edge_err <= 1e-6
    criterion("C5 small-instance optimality", ok,
              f"2-face square, {len(fields)} targets: face vs KKT {face_err:.1e}, edge vs KKT {edge_err:.1e} (<=1e-6)")
    assert ok


# 6 -----------------------------------------------------------------------
_C6_WORST = []


@settings(max_examples=60, deadline=None)
@given(
    coef=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    which=st.sampled_from(["disk", "grid"]),
    source=st.integers(0, 10**6),
)
def _c6_property(coef, which, source):
    mesh = _C6_MESHES[which]
    s = source % mesh.n_vertices
    phi = coef[0] * mesh.vertices[:, 0] + coef[1] * mesh.vertices[:, 1] + coef[2]
    lv = bfs_levels(mesh, [s])
    expected = phi - phi[s]
    dF = integrate_face_gradients(mesh, lv, face_gradient(mesh, phi))
    dX = integrate_edge_differences(mesh, lv, phi[mesh.edges[:, 1]] - phi[mesh.edges[:, 0]])
    _C6_WORST.append(max(np.abs(dF - expected).max(), np.abs(dX - expected).max()))


_C6_MESHES = {}


def test_c06_integration_exactness(criterion):
    _C6_MESHES["disk"] = make_disk(20)
    _C6_MESHES["grid"] = make_grid(25, 17, 1.7, 1.1)
    _C6_WORST.clear()
    _c6_property()
    worst = max(_C6_WORST)
    ok = worst <= 1e-12
    criterion("C6 integration exactness", ok,
              f"{len(_C6_WORST)} sampled linear functions, max |d - (phi - phi(s))| = {worst:.1e} (<=1e-12)")
    assert ok


# 7 -----------------------------------------------------------------------
def test_c07_method_agreement(disk10k, disk_runs, criterion):
    V = disk10k.vertices
    diameter = float(np.max(np.linalg.norm(V - V[np.argmax(np.linalg.norm(V, axis=1))], axis=1)))
    pairs = [("face", "edge"), ("face", "poisson"), ("edge", "poisson")]
    e2 = {f"{a}/{b}": recovery_error(disk_runs[a], disk_runs[b]) for a, b in pairs}
    ok = all(v <= 0.01 * diameter for v in e2.values())
    criterion("C7 method agreement", ok,
              " ".join(f"E2({k})={v:.2e}" for k, v in e2.items()) + f" (<= {0.01 * diameter:.3f})")
    assert ok


# 8 -----------------------------------------------------------------------
def test_c08_memory_claim(criterion):
    meshes = [make_icosphere(k) for k in range(1, 6)] + [subdivide(make_icosphere(1), 2)]
    ratios = []
    exact = True
    for mesh in meshes:
        assert mesh.is_closed
        nf, ne, ni = mesh.n_faces, mesh.n_edges, mesh.n_interior_edges
        face = solver_state_bytes(mesh, "face")
        edge = solver_state_bytes(mesh, "edge")
        exact &= face == (6 * nf + 15 * ni) * 8 == face_state_bytes(nf, ni) == 228 * nf
        exact &= edge == (6 * nf + 2 * ne) * 8 + 3 * nf == edge_state_bytes(nf, ne) == 75 * nf
        ratios.append(edge / face)
    H = np.zeros((meshes[0].n_faces, 3))
    exact &= admm_face_optimize(meshes[0], H)[1].state_bytes == solver_state_bytes(meshes[0], "face")
    exact &= admm_edge_optimize(meshes[0], H)[1].state_bytes == solver_state_bytes(meshes[0], "edge")
    ok = exact and max(ratios) <= 0.5
    criterion("C8 memory claim", ok,
              f"{len(meshes)} closed meshes, edge/face ratio max={max(ratios):.4f} (<=0.5), "
              f"formulas exact={exact}")
    assert ok


# 9 -----------------------------------------------------------------------
def test_c09_multi_source(disk10k, criterion):
    V = disk10k.vertices
    a = int(np.argmin(np.linalg.norm(V - [-0.4, 0.1, 0], axis=1)))
    b = int(np.argmin(np.linalg.norm(V - [0.5, -0.3, 0], axis=1)))
    ref = euclidean_distance(V, [a, b])
    eps = {}
    for method in ("face", "edge"):
        d = HeatGeodesic(method=method).fit(disk10k).predict([a, b])
        eps[method] = mean_relative_error(d, ref, [a, b])
    ok = all(v <= 0.02 for v in eps.values())
    criterion("C9 multi-source", ok,
              f"sources {{{a},{b}}}: eps face={eps['face']:.4%} edge={eps['edge']:.4%} (<=2%)")
    assert ok


# 10 ----------------------------------------------------------------------
def test_c10a_determinism(disk10k, criterion):
    same = True
    for method in ("face", "edge"):
        runs = [HeatGeodesic(method=method, threads=n).fit(disk10k).predict([0]) for n in (1, 2, 4, 8)]
        runs.append(HeatGeodesic(method=method, sequential=True).fit(disk10k).predict([0]))
        same &= all(np.array_equal(r, runs[0]) for r in runs)
    ok = bool(same)
    criterion("C10 determinism", ok, "face and edge distances bitwise identical for threads 1,2,4,8 and --seq")
    assert ok


@pytest.mark.slow
def test_c10b_parallel_speedup(criterion):
    mesh = make_disk(258)
    assert mesh.n_vertices >= 200_000
    est = {n: HeatGeodesic(method="face", threads=n).fit(mesh) for n in (1, 4)}
    wall = {}
    outputs = {}
    for n in (1, 4):
        times = []
        for _ in range(2):
            tic = time.perf_counter()
            outputs[n] = est[n].predict([0])
            times.append(time.perf_counter() - tic)
        wall[n] = min(times)
    ratio = wall[4] / wall[1]
    ok = ratio <= 0.6 and np.array_equal(outputs[1], outputs[4])
    criterion("C10 parallel speedup (soft)", ok,
              f"|V|={mesh.n_vertices} wall 1 thread={wall[1]:.2f}s 4 threads={wall[4]:.2f}s "
              f"ratio={ratio:.2f} (<=0.6) on {_parallel.os.cpu_count()} cores")
    assert ok


# 11 ----------------------------------------------------------------------
def test_c11_residual_semantics(criterion):
    meshes = {"disk": make_disk(20), "sphere": make_icosphere(3), "grid": make_grid(20, 20)}
    rule = True
    increases = {}
    for name, mesh in meshes.items():
        u = gs_diffuse(mesh, bfs_levels(mesh, [0]), diffusion_time(mesh))
        H = normalized_target_gradients(mesh, u)
        for method, solve in (("face", admm_face_optimize), ("edge", admm_edge_optimize)):
            _, rep = solve(mesh, H, AdmmConfig(max_iterations=5000))
            rule &= rep.converged and rep.final_primal <= rep.primal_tol and rep.final_dual <= rep.dual_tol
            p = np.asarray(rep.primal_history[2:])
            d = np.asarray(rep.dual_history[2:])
            increases[f"{name}/{method}"] = int(np.sum(np.diff(p) > 0) + np.sum(np.diff(d) > 0))
    monotone = all(v == 0 for v in increases.values())
    ok = bool(rule) and monotone
    criterion("C11 residual semantics", ok,
              f"threshold rule after running past I_max: {bool(rule)}; residual increases from "
              f"iteration 3 on: " + " ".join(f"{k}={v}" for k, v in increases.items()) + " (want 0)")
    assert ok


# 12 ----------------------------------------------------------------------
def test_c12_oracle_ordering(disk10k, sphere10k, disk_runs, sphere_runs, criterion):
    parts = []
    ok = True
    for name, mesh, kind, runs in (("disk", disk10k, "euclid", disk_runs), ("sphere", sphere10k, "sphere", sphere_runs)):
        ref = analytic_oracle(kind, mesh, [0])
        dj = dijkstra_edge_distance(mesh, [0])
        # collinear edge paths on the flat disk tie the oracle up to roundoff
        upper = bool(np.all(dj >= ref * (1 - 1e-12)))
        ok &= upper
        parts.append(f"{name}: dijkstra>=oracle {upper} (min ratio {np.min(dj[1:] / ref[1:]):.6f})")
        for method in ("face", "edge"):
            d = runs[method]
            low = int(np.sum(d[1:] < 0.98 * ref[1:]))
            high = int(np.sum(d[1:] > 1.001 * dj[1:]))
            ok &= low == 0 and high == 0
            parts.append(f"{name}/{method}: below 0.98*oracle {low}, above 1.001*dijkstra {high} "
                         f"(min d/oracle {np.min(d[1:] / ref[1:]):.3f})")
    criterion("C12 oracle ordering", ok, "; ".join(parts))
    assert ok
