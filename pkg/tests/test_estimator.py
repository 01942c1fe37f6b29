import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from geoheat.datasets import make_disk, make_square
from geoheat.estimator import HeatGeodesic
from geoheat.mesh import TriMesh
from geoheat.reference import analytic_oracle, mean_relative_error


def test_params_round_trip():
    est = HeatGeodesic(method="edge", m=2.0, admm_iters=5)
    params = est.get_params()
    assert params["method"] == "edge" and params["m"] == 2.0 and params["admm_iters"] == 5
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(mu=50.0)
    assert est.mu == 50.0


def test_not_fitted():
    with pytest.raises(NotFittedError):
        HeatGeodesic().predict([0])


@pytest.mark.parametrize("kwargs", [
    {"method": "fast"}, {"m": 0.0}, {"m": float("nan")}, {"gs_iters": -1}, {"gs_iters": 2.5},
    {"admm_iters": -3}, {"mu": -1.0}, {"eps": 0.0}, {"threads": 0}, {"cg_tol": 0.0},
])
def test_invalid_params(kwargs, square):
    with pytest.raises((TypeError, ValueError)):
        HeatGeodesic(**kwargs).fit(square)


def test_accepts_vertex_face_pair():
    sq = make_square()
    d = HeatGeodesic(method="edge").fit((sq.vertices, sq.faces)).predict(0)
    assert d.shape == (4,) and d[0] == 0


@pytest.mark.parametrize("sources, err", [([], ValueError), ([4], IndexError), ([-1], IndexError),
                                          ([0.5], ValueError), (np.ones(4, bool), ValueError)])
def test_invalid_sources(sources, err, square):
    with pytest.raises(err):
        HeatGeodesic().fit(square).predict(sources)


def test_isolated_source_rejected():
    mesh = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [3, 3, 3]], [[0, 1, 2]])
    with pytest.raises(ValueError, match="no incident face"):
        HeatGeodesic().fit(mesh).predict([3])
    d = HeatGeodesic().fit(mesh).predict([0])
    assert np.isinf(d[3])


@pytest.mark.parametrize("method", ["face", "edge", "poisson"])
def test_methods_on_disk(method, small_disk):
    est = HeatGeodesic(method=method).fit(small_disk)
    d = est.predict([0])
    ref = analytic_oracle("euclid", small_disk, [0])
    assert mean_relative_error(d, ref, [0]) < 0.05
    rep = est.report_
    assert rep.method == method and rep.sources == (0,)
    assert all(v >= 0 for v in rep.stage_times().values())
    assert sum(rep.stage_times().values()) <= rep.time_total * 1.05
    assert est.score([0]) == pytest.approx(-mean_relative_error(d, ref, [0]))


def test_admm_zero_iterations_integrates_targets(small_disk):
    est = HeatGeodesic(admm_iters=0).fit(small_disk)
    est.predict([0])
    assert est.report_.admm_iterations == 0
    np.testing.assert_array_equal(est.field_, est.target_field_)


def test_report_echoes_config(small_disk):
    est = HeatGeodesic(method="edge", m=3.0, gs_iters=77, admm_iters=4, mu=50.0, eps=1e-6,
                       threads=2, sequential=True).fit(small_disk)
    est.predict([1, 2])
    r = est.report_
    assert (r.m, r.gs_iters, r.admm_iters, r.mu, r.eps_primal, r.eps_dual) == (3.0, 77, 4, 50.0, 1e-6, 1e-6)
    assert r.sequential and r.threads == 2 and r.sources == (1, 2)
    assert r.t == pytest.approx(3.0 * r.h ** 2)
    assert r.solver_state_bytes == (6 * small_disk.n_faces + 2 * small_disk.n_edges) * 8 + 3 * small_disk.n_faces


def test_fit_predict_equals_two_step():
    mesh = make_disk(6)
    a = HeatGeodesic().fit_predict(mesh, [0])
    b = HeatGeodesic().fit(mesh).predict([0])
    assert np.array_equal(a, b)
