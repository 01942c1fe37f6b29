"""Command line: ``geoheat distance``, ``geoheat bench`` and ``geoheat subdivide``.

Exit codes: 0 success, 1 parse or IO error, 2 invalid configuration,
3 solver failure.  Messages go to standard error.
"""

import argparse
import csv
import hashlib
import io
import os
import sys

import numpy as np

from . import _parallel
from .estimator import METHODS, HeatGeodesic, SolverError, attach_reference
from .io import MeshParseError, load_mesh, save_mesh, write_ply
from .mesh import MeshError, subdivide
from .report import RunReport

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}", EXIT_CONFIG)


def _index_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _name_list(text):
    names = [v.strip() for v in text.split(",") if v.strip()]
    bad = [n for n in names if n not in METHODS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {','.join(METHODS)}, got {text!r}")
    return names


def _add_solver_flags(p):
    p.add_argument("--mesh", required=True, help="input mesh (.obj or .ply)")
    p.add_argument("--m", type=float, default=1.0, help="diffusion time factor (default 1.0)")
    p.add_argument("--gs-iters", type=int, default=1000, help="Gauss-Seidel sweeps (default 1000)")
    p.add_argument("--admm-iters", type=int, default=10, help="ADMM iteration cap (default 10)")
    p.add_argument("--mu", type=float, default=100.0, help="ADMM penalty (default 100)")
    p.add_argument("--eps", type=float, default=1e-5, help="ADMM residual tolerance (default 1e-5)")
    p.add_argument("--seq", action="store_true", help="run every phase sequentially")


def build_parser():
    parser = _Parser(prog="geoheat", description="Heat-method geodesic distances on triangle meshes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("distance", help="compute per-vertex distances")
    _add_solver_flags(p)
    p.add_argument("--source", type=_index_list, required=True, help="source vertex IDX[,IDX...]")
    p.add_argument("--method", choices=METHODS, default="face")
    p.add_argument("--threads", type=int, default=None, help="thread count (default: hardware)")
    p.add_argument("--out", default=None, help="output path (default: standard output)")
    p.add_argument("--out-format", choices=("txt", "ply", "csv"), default="txt")
    p.add_argument("--report", default=None, help="write the run report here instead of stderr")
    p.add_argument("--reference", choices=("euclid", "sphere"), default=None,
                   help="compare against an analytic oracle")

    p = sub.add_parser("bench", help="time methods across thread counts")
    _add_solver_flags(p)
    p.add_argument("--source", type=_index_list, default=[0])
    p.add_argument("--methods", type=_name_list, default=["face", "edge"])
    p.add_argument("--threads-list", type=_index_list, default=[1])
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default: standard output)")

    p = sub.add_parser("subdivide", help="midpoint 1-to-4 subdivision")
    p.add_argument("--mesh", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--out", required=True)
    return parser


def _load(path):
    try:
        return load_mesh(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO)
    except MeshError as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO)


def _estimator(args, method, threads):
    params = dict(method=method, m=args.m, gs_iters=args.gs_iters, admm_iters=args.admm_iters,
                  mu=args.mu, eps=args.eps, threads=threads, sequential=args.seq)
    try:
        est = HeatGeodesic(**params)
        est._check_params()
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc), EXIT_CONFIG)
    return est


def _run(est, mesh, sources):
    try:
        est.fit(mesh)
        return est.predict(sources)
    except (IndexError, TypeError, ValueError) as exc:
        raise CliError(str(exc), EXIT_CONFIG)
    except (SolverError, ArithmeticError) as exc:
        raise CliError(f"solver failure: {exc}", EXIT_SOLVER)


def format_distances(d, fmt):
    if fmt == "txt":
        return "".join(f"{x:.17g}\n" for x in d.tolist())
    if fmt == "csv":
        return "vertex_index,distance\n" + "".join(f"{i},{x:.17g}\n" for i, x in enumerate(d.tolist()))
    raise ValueError(fmt)


def _write_output(target, payload):
    try:
        if target is None:
            if isinstance(payload, bytes):
                sys.stdout.buffer.write(payload)
                sys.stdout.flush()
            else:
                sys.stdout.write(payload)
            return
        mode = "wb" if isinstance(payload, bytes) else "w"
        with open(target, mode) as fh:
            fh.write(payload)
    except OSError as exc:
        raise CliError(f"cannot write {target}: {exc.strerror or exc}", EXIT_IO)


def _resolve_threads(threads):
    try:
        if threads is not None and threads < 1:
            raise ValueError(f"--threads must be >= 1, got {threads}")
        return _parallel.resolve_threads(threads)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG)


def cmd_distance(args):
    threads = _resolve_threads(args.threads)
    est = _estimator(args, args.method, threads)
    mesh = _load(args.mesh)
    d = _run(est, mesh, args.source)
    report = est.report_
    report.mesh = str(args.mesh)
    report.out = "" if args.out is None else str(args.out)
    report.out_format = args.out_format
    if args.reference:
        try:
            attach_reference(report, mesh, d, args.reference)
        except ValueError as exc:
            raise CliError(f"reference {args.reference}: {exc}", EXIT_CONFIG)

    if args.out_format == "ply":
        buf = io.BytesIO()
        write_ply(buf, mesh.vertices, mesh.faces, quality=d)
        _write_output(args.out, buf.getvalue())
    else:
        _write_output(args.out, format_distances(d, args.out_format))

    text = report.to_text()
    if args.report:
        _write_output(args.report, text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_bench(args):
    if args.repeats < 1:
        raise CliError(f"--repeats must be >= 1, got {args.repeats}", EXIT_CONFIG)
    thread_counts = [_resolve_threads(n) for n in args.threads_list]
    mesh = _load(args.mesh)
    names = [f.name for f in RunReport.__dataclass_fields__.values()]
    columns = ["repeat", *names, "distance_sha256"]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for method in args.methods:
        digests = set()
        wall = {}
        for requested, threads in zip(args.threads_list, thread_counts):
            for rep in range(args.repeats):
                est = _estimator(args, method, threads)
                d = _run(est, mesh, args.source)
                report = est.report_
                report.mesh = str(args.mesh)
                digest = hashlib.sha256(np.ascontiguousarray(d).tobytes()).hexdigest()
                digests.add(digest)
                wall.setdefault(threads, []).append(report.time_total)
                row = report.to_dict()
                row["sources"] = ",".join(str(s) for s in report.sources)
                writer.writerow([rep, *[row[n] if row[n] is not None else "" for n in names], digest])
        if len(digests) > 1:
            sys.stderr.write(f"warning: {method} distances differ across runs\n")
        ordered = sorted(wall)
        for a, b in zip(ordered, ordered[1:]):
            if min(wall[b]) >= min(wall[a]):
                sys.stderr.write(
                    f"note: {method} not faster at {b} threads than at {a} "
                    f"({min(wall[b]):.3f}s vs {min(wall[a]):.3f}s, {os.cpu_count()} cores)\n"
                )
    _write_output(args.out, out.getvalue())
    return EXIT_OK


def cmd_subdivide(args):
    if args.levels < 0:
        raise CliError(f"--levels must be >= 0, got {args.levels}", EXIT_CONFIG)
    mesh = _load(args.mesh)
    fine = subdivide(mesh, args.levels)
    try:
        save_mesh(args.out, fine)
    except MeshParseError as exc:
        raise CliError(str(exc), EXIT_IO)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc.strerror or exc}", EXIT_IO)
    return EXIT_OK


COMMANDS = {"distance": cmd_distance, "bench": cmd_bench, "subdivide": cmd_subdivide}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
