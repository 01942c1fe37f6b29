"""OBJ and PLY reading and writing.

Only triangle meshes are supported.  PLY may be ASCII or binary
little-endian with the vertex element before the face element.
"""

import io as _io
import os

import numpy as np

from .mesh import MeshError, TriMesh

__all__ = [
    "MeshParseError",
    "load_mesh",
    "read_obj",
    "read_ply",
    "write_obj",
    "write_ply",
    "save_mesh",
]


class MeshParseError(MeshError):
    """Malformed mesh file; ``location`` names the line or byte offset."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


def _guess_format(path):
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".obj", ".ply"):
        return ext[1:]
    raise MeshParseError(f"cannot infer mesh format from extension {ext!r}")


def load_mesh(source, format=None):
    """Read a :class:`TriMesh` from a path, bytes, or binary stream.

    Parameters
    ----------
    source : str, os.PathLike, bytes or binary file object
    format : {"obj", "ply"}, optional
        Required unless ``source`` is a path with a recognised extension.
    """
    if isinstance(source, (str, os.PathLike)):
        if format is None:
            format = _guess_format(source)
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if format is None:
        raise MeshParseError("format must be given for non-path sources")
    format = format.lower()
    if format == "obj":
        vertices, faces = read_obj(data)
    elif format == "ply":
        vertices, faces, _ = read_ply(data)
    else:
        raise MeshParseError(f"unsupported format {format!r}")
    return TriMesh(vertices, faces)


def read_obj(data):
    """Parse ``v`` and ``f`` records of an ASCII OBJ file.

    Face entries may carry ``/vt/vn`` suffixes and negative (relative)
    indices.  Returns ``(vertices, faces)`` with 0-based faces.
    """
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8", errors="replace")
    vertices = []
    faces = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshParseError("vertex needs 3 coordinates", f"line {lineno}")
            try:
                vertices.append([float(x) for x in parts[1:4]])
            except ValueError:
                raise MeshParseError(f"bad vertex coordinate in {raw!r}", f"line {lineno}")
        elif tag == "f":
            if len(parts) != 4:
                raise MeshParseError(
                    f"only triangles are supported, got {len(parts) - 1} vertices",
                    f"line {lineno}",
                )
            tri = []
            for token in parts[1:]:
                try:
                    idx = int(token.split("/")[0])
                except ValueError:
                    raise MeshParseError(f"bad face index {token!r}", f"line {lineno}")
                if idx > 0:
                    idx -= 1
                elif idx < 0:
                    idx += len(vertices)
                else:
                    raise MeshParseError("face index 0 is invalid in OBJ", f"line {lineno}")
                if not 0 <= idx < len(vertices):
                    raise MeshParseError(f"face index {token} out of range", f"line {lineno}")
                tri.append(idx)
            faces.append(tri)
    V = np.array(vertices, dtype=np.float64).reshape(-1, 3)
    F = np.array(faces, dtype=np.int64).reshape(-1, 3)
    return V, F


_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def _parse_ply_header(data):
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise MeshParseError("missing ply magic or end_header", "offset 0")
    nl = data.find(b"\n", end)
    body_offset = len(data) if nl < 0 else nl + 1
    header = data[:end].decode("ascii", errors="replace").splitlines()
    fmt = None
    elements = []
    for lineno, line in enumerate(header, start=1):
        parts = line.split()
        if not parts or parts[0] in ("ply", "comment", "obj_info"):
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append({"name": parts[1], "count": int(parts[2]), "props": []})
        elif parts[0] == "property":
            if not elements:
                raise MeshParseError("property before element", f"line {lineno}")
            if parts[1] == "list":
                elements[-1]["props"].append((parts[4], "list", parts[2], parts[3]))
            else:
                elements[-1]["props"].append((parts[2], parts[1]))
        else:
            raise MeshParseError(f"unknown header keyword {parts[0]!r}", f"line {lineno}")
    if fmt not in ("ascii", "binary_little_endian"):
        raise MeshParseError(f"unsupported PLY format {fmt!r}", "header")
    names = [e["name"] for e in elements]
    if "vertex" not in names or "face" not in names:
        raise MeshParseError("PLY needs vertex and face elements", "header")
    if names.index("vertex") > names.index("face"):
        raise MeshParseError("vertex element must precede face element", "header")
    for e in elements:
        for p in e["props"]:
            for t in p[1:] if p[1] != "list" else p[2:]:
                if t not in _PLY_TYPES:
                    raise MeshParseError(f"unknown PLY type {t!r}", "header")
    return fmt, elements, body_offset


def read_ply(data):
    """Parse a PLY file.  Returns ``(vertices, faces, vertex_properties)``."""
    if not isinstance(data, (bytes, bytearray)):
        data = data.encode("ascii")
    data = bytes(data)
    fmt, elements, offset = _parse_ply_header(data)
    if fmt == "ascii":
        return _read_ply_ascii(data, elements, offset)
    return _read_ply_binary(data, elements, offset)


def _vertex_arrays(props, table):
    names = [p[0] for p in props]
    for axis in "xyz":
        if axis not in names:
            raise MeshParseError(f"vertex element lacks property {axis!r}", "header")
    V = np.stack([table[names.index(a)] for a in "xyz"], axis=1).astype(np.float64)
    extra = {n: np.asarray(table[i]) for i, n in enumerate(names) if n not in "xyz"}
    return V, extra


def _read_ply_ascii(data, elements, offset):
    text = data[offset:].decode("ascii", errors="replace").splitlines()
    header_lines = data[:offset].count(b"\n")
    cursor = 0
    V = F = None
    extra = {}
    for e in elements:
        rows = []
        for _ in range(e["count"]):
            while cursor < len(text) and not text[cursor].strip():
                cursor += 1
            if cursor >= len(text):
                raise MeshParseError(f"unexpected end of {e['name']} data", f"line {header_lines + cursor + 1}")
            rows.append((header_lines + cursor + 1, text[cursor].split()))
            cursor += 1
        if e["name"] == "vertex":
            if any(p[1] == "list" for p in e["props"]):
                raise MeshParseError("list properties on vertices are unsupported", "header")
            try:
                table = np.array([[float(x) for x in r[: len(e["props"])]] for _, r in rows])
            except ValueError:
                raise MeshParseError("bad vertex value", f"line {rows[0][0]}")
            table = table.reshape(-1, len(e["props"])).T
            V, extra = _vertex_arrays(e["props"], table)
        elif e["name"] == "face":
            faces = []
            for lineno, r in rows:
                try:
                    vals = [int(x) for x in r]
                except ValueError:
                    raise MeshParseError("bad face index", f"line {lineno}")
                if not vals or vals[0] != 3 or len(vals) < 4:
                    raise MeshParseError("only triangles are supported", f"line {lineno}")
                faces.append(vals[1:4])
            F = np.array(faces, dtype=np.int64).reshape(-1, 3)
    return V, F, extra


def _read_ply_binary(data, elements, offset):
    V = F = None
    extra = {}
    for e in elements:
        props = e["props"]
        if e["name"] == "face" or any(p[1] == "list" for p in props):
            if e["name"] != "face":
                raise MeshParseError(f"list properties on {e['name']!r} are unsupported", f"offset {offset}")
            count_t = np.dtype("<" + _PLY_TYPES[props[0][2]])
            index_t = np.dtype("<" + _PLY_TYPES[props[0][3]])
            if len(props) == 1:
                row = np.dtype([("n", count_t), ("idx", index_t, 3)])
                need = row.itemsize * e["count"]
                if offset + need > len(data):
                    raise MeshParseError("truncated face data", f"offset {offset}")
                table = np.frombuffer(data, dtype=row, count=e["count"], offset=offset)
                if np.any(table["n"] != 3):
                    bad = int(np.flatnonzero(table["n"] != 3)[0])
                    raise MeshParseError("only triangles are supported", f"offset {offset + bad * row.itemsize}")
                F = table["idx"].astype(np.int64)
                offset += need
            else:
                raise MeshParseError("face element must hold a single index list", f"offset {offset}")
        else:
            row = np.dtype([(p[0], "<" + _PLY_TYPES[p[1]]) for p in props])
            need = row.itemsize * e["count"]
            if offset + need > len(data):
                raise MeshParseError(f"truncated {e['name']} data", f"offset {offset}")
            table = np.frombuffer(data, dtype=row, count=e["count"], offset=offset)
            offset += need
            if e["name"] == "vertex":
                V, extra = _vertex_arrays(props, [table[p[0]] for p in props])
    return V, F, extra


def write_obj(path_or_file, vertices, faces):
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in np.asarray(vertices, dtype=np.float64).tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in np.asarray(faces).tolist()]
    _write_text(path_or_file, "\n".join(lines) + "\n")


def write_ply(path_or_file, vertices, faces, quality=None, binary=False):
    """Write an ASCII (default) or binary little-endian PLY.

    ``quality`` adds a per-vertex double property of that name.
    """
    V = np.asarray(vertices, dtype=np.float64)
    F = np.asarray(faces, dtype=np.int64)
    header = [
        "ply",
        "format binary_little_endian 1.0" if binary else "format ascii 1.0",
        f"element vertex {len(V)}",
        "property double x",
        "property double y",
        "property double z",
    ]
    if quality is not None:
        quality = np.asarray(quality, dtype=np.float64)
        header.append("property double quality")
    header += [f"element face {len(F)}", "property list uchar int vertex_indices", "end_header"]
    head = ("\n".join(header) + "\n").encode("ascii")
    if binary:
        fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
        if quality is not None:
            fields.append(("quality", "<f8"))
        vt = np.empty(len(V), dtype=fields)
        vt["x"], vt["y"], vt["z"] = V[:, 0], V[:, 1], V[:, 2]
        if quality is not None:
            vt["quality"] = quality
        ft = np.empty(len(F), dtype=[("n", "u1"), ("idx", "<i4", 3)])
        ft["n"] = 3
        ft["idx"] = F
        payload = head + vt.tobytes() + ft.tobytes()
    else:
        rows = []
        for i, (x, y, z) in enumerate(V.tolist()):
            row = f"{x!r} {y!r} {z!r}"
            if quality is not None:
                row += f" {float(quality[i])!r}"
            rows.append(row)
        rows += [f"3 {a} {b} {c}" for a, b, c in F.tolist()]
        payload = head + ("\n".join(rows) + "\n").encode("ascii")
    _write_bytes(path_or_file, payload)


def save_mesh(path, mesh, quality=None):
    """Write ``mesh`` to ``path``; the format follows the extension."""
    fmt = _guess_format(path)
    if fmt == "obj":
        write_obj(path, mesh.vertices, mesh.faces)
    else:
        write_ply(path, mesh.vertices, mesh.faces, quality=quality)


def _write_text(target, text):
    _write_bytes(target, text.encode("utf-8"))


def _write_bytes(target, payload):
    if isinstance(target, (str, os.PathLike)):
        with open(target, "wb") as fh:
            fh.write(payload)
    elif isinstance(target, _io.TextIOBase):
        target.write(payload.decode("utf-8"))
    else:
        target.write(payload)
