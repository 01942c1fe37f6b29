import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoheat.report import RunReport, SolverReport

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(m=finite, t=finite, threads=st.integers(1, 64), seq=st.booleans(),
       sources=st.lists(st.integers(0, 10**6), max_size=5),
       eps=st.one_of(st.none(), finite), mesh=st.text("abc/._-0123", max_size=20))
def test_text_round_trip(m, t, threads, seq, sources, eps, mesh):
    r = RunReport(method="edge", m=m, t=t, threads=threads, sequential=seq, sources=tuple(sources),
                  epsilon=eps, mesh=mesh)
    assert RunReport.from_text(r.to_text()) == r


def test_text_is_flat_key_value():
    lines = RunReport().to_text().splitlines()
    assert all(" = " in ln for ln in lines)
    assert len({ln.split(" = ")[0] for ln in lines}) == len(lines)


def test_from_text_rejects_unknown():
    with pytest.raises(ValueError, match="line 1"):
        RunReport.from_text("colour = blue\n")
    with pytest.raises(ValueError):
        RunReport.from_text("sequential = maybe\n")


def test_solver_report_finals():
    r = SolverReport("face")
    assert r.final_primal == 0.0
    r.primal_history = [3.0, 1.0]
    r.dual_history = [2.0]
    assert (r.final_primal, r.final_dual) == (1.0, 2.0)
