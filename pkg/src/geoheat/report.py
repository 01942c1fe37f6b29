"""Solver and run reports.

``RunReport.to_text`` writes one ``key = value`` line per field, and
``RunReport.from_text`` reads that text back.  Floats use ``repr``, so a
round trip is exact.
"""

import dataclasses
from dataclasses import dataclass, field

__all__ = ["SolverReport", "RunReport"]


@dataclass
class SolverReport:
    """Outcome of one iterative gradient solve."""

    method: str
    iterations: int = 0
    converged: bool = False
    primal_history: list = field(default_factory=list)
    dual_history: list = field(default_factory=list)
    primal_tol: float = 0.0
    dual_tol: float = 0.0
    wall_time: float = 0.0
    state_bytes: int = 0
    allocated_bytes: int = 0

    @property
    def final_primal(self):
        return self.primal_history[-1] if self.primal_history else 0.0

    @property
    def final_dual(self):
        return self.dual_history[-1] if self.dual_history else 0.0


@dataclass
class RunReport:
    """Everything needed to describe, and re-run, one distance computation."""

    method: str = "face"
    mesh: str = ""
    sources: tuple = ()
    n_vertices: int = 0
    n_edges: int = 0
    n_faces: int = 0
    quality: float = 0.0
    h: float = 0.0
    m: float = 1.0
    t: float = 0.0
    gs_iters: int = 1000
    admm_iters: int = 10
    mu: float = 100.0
    eps_primal: float = 1e-5
    eps_dual: float = 1e-5
    threads: int = 1
    sequential: bool = False
    out: str = ""
    out_format: str = "txt"
    reference: str = ""
    time_init: float = 0.0
    time_diffusion: float = 0.0
    time_optimization: float = 0.0
    time_integration: float = 0.0
    time_total: float = 0.0
    solver_state_bytes: int = 0
    admm_iterations: int = 0
    admm_converged: bool = False
    final_primal: float = 0.0
    final_dual: float = 0.0
    primal_tol: float = 0.0
    dual_tol: float = 0.0
    n_unreachable: int = 0
    zero_gradient_faces: int = 0
    e1: float | None = None
    epsilon: float | None = None
    e2: float | None = None
    peak_rss_bytes: int | None = None

    def stage_times(self):
        return {
            "init": self.time_init,
            "diffusion": self.time_diffusion,
            "optimization": self.time_optimization,
            "integration": self.time_integration,
        }

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_text(self):
        lines = [f"{f.name} = {_format(getattr(self, f.name))}" for f in dataclasses.fields(self)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in kinds:
                raise ValueError(f"line {lineno}: unrecognised entry {raw!r}")
            values[key] = _parse(kinds[key], value.strip())
        return cls(**values)


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(str(v) for v in value)
    return str(value)


def _parse(kind, text):
    kind = kind if isinstance(kind, str) else getattr(kind, "__name__", str(kind))
    if text == "none" and "None" in kind:
        return None
    if kind.startswith("bool"):
        if text not in ("true", "false"):
            raise ValueError(f"expected true/false, got {text!r}")
        return text == "true"
    if kind.startswith("int"):
        return int(text)
    if kind.startswith("float"):
        return float(text)
    if kind.startswith("tuple"):
        return tuple(int(v) for v in text.split(",")) if text else ()
    return text
