"""Point-cloud file I/O: ASCII PLY, binary little-endian PLY, and XYZ text.

Positions and normals are stored as float64 so binary round trips are exact;
colors use the conventional uchar red/green/blue triple.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import CloudParseError, InvalidArgumentError

log = logging.getLogger(__name__)

FORMATS = ("ply-ascii", "ply-binary", "xyz")

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def write_cloud(cloud: PointCloud, path, fmt: str = "ply-binary") -> None:
    if fmt not in FORMATS:
        raise InvalidArgumentError(f"format must be one of {FORMATS}, got {fmt!r}")
    path = Path(path)
    if fmt == "xyz":
        _write_xyz(cloud, path)
        return
    binary = fmt == "ply-binary"
    header = ["ply",
              f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
              f"element vertex {len(cloud)}"]
    fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
    header += ["property double x", "property double y", "property double z"]
    if cloud.colors is not None:
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    if cloud.normals is not None:
        fields += [("nx", "<f8"), ("ny", "<f8"), ("nz", "<f8")]
        header += ["property double nx", "property double ny", "property double nz"]
    header.append("end_header")

    data = np.empty(len(cloud), dtype=np.dtype(fields))
    data["x"], data["y"], data["z"] = cloud.points.T
    if cloud.colors is not None:
        rgb = np.round(cloud.colors * 255.0).astype(np.uint8)
        data["red"], data["green"], data["blue"] = rgb.T
    if cloud.normals is not None:
        data["nx"], data["ny"], data["nz"] = cloud.normals.T

    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(data.tobytes())
        else:
            for rec in data:
                fh.write((" ".join(_fmt_ascii(v) for v in rec) + "\n").encode("ascii"))


def _fmt_ascii(v) -> str:
    if isinstance(v, (np.uint8, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_xyz(cloud: PointCloud, path: Path) -> None:
    if cloud.colors is not None:
        log.warning("xyz format has no color columns; colors dropped for %s", path)
    cols = [cloud.points]
    if cloud.normals is not None:
        cols.append(cloud.normals)
    rows = np.hstack(cols)
    with open(path, "w") as fh:
        for row in rows:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_cloud(path) -> PointCloud:
    path = Path(path)
    if path.suffix.lower() == ".xyz":
        return _read_xyz(path)
    return _read_ply(path)


def _read_xyz(path: Path) -> PointCloud:
    pts, normals = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) not in (3, 6):
                raise CloudParseError(
                    f"xyz line has {len(parts)} columns, expected 3 or 6", line=lineno)
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise CloudParseError(f"bad number in {parts!r}", line=lineno) from None
            pts.append(vals[:3])
            if len(vals) == 6:
                normals.append(vals[3:])
    if normals and len(normals) != len(pts):
        raise CloudParseError("mixed 3- and 6-column xyz rows")
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    return PointCloud(pts, normals=_clean_normals(np.asarray(normals)) if normals else None)


def _read_ply(path: Path) -> PointCloud:
    raw = path.read_bytes()
    try:
        header_end = raw.index(b"end_header\n") + len(b"end_header\n")
    except ValueError:
        raise CloudParseError("missing end_header", line=1) from None
    lines = raw[:header_end].decode("ascii", errors="replace").splitlines()
    if not lines or lines[0].strip() != "ply":
        raise CloudParseError("not a PLY file (missing 'ply' magic)", line=1)

    binary = None
    vertex_count = None
    props: list[tuple[str, str]] = []  # (name, numpy dtype)
    in_vertex = False
    trailing_elements = []
    for lineno, line in enumerate(lines[1:], start=2):
        tok = line.split()
        if not tok or tok[0] == "comment":
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] not in ("ascii", "binary_little_endian"):
                raise CloudParseError(f"unsupported format {line!r}", line=lineno)
            binary = tok[1] == "binary_little_endian"
        elif tok[0] == "element":
            if len(tok) != 3:
                raise CloudParseError(f"malformed element line {line!r}", line=lineno)
            if tok[1] == "vertex":
                try:
                    vertex_count = int(tok[2])
                except ValueError:
                    raise CloudParseError(f"bad vertex count {tok[2]!r}", line=lineno) from None
                in_vertex = True
            else:
                in_vertex = False
                trailing_elements.append(tok[1])
        elif tok[0] == "property":
            if not in_vertex:
                continue
            if tok[1] == "list":
                raise CloudParseError("list properties on vertices are unsupported", line=lineno)
            if len(tok) != 3 or tok[1] not in _PLY_TYPES:
                raise CloudParseError(f"unsupported property {line!r}", line=lineno)
            props.append((tok[2], _PLY_TYPES[tok[1]]))
        elif tok[0] == "end_header":
            break
        else:
            raise CloudParseError(f"unexpected header line {line!r}", line=lineno)
    if binary is None:
        raise CloudParseError("header missing format line", line=1)
    if vertex_count is None:
        raise CloudParseError("header missing vertex element", line=1)
    for axis in "xyz":
        if axis not in (name for name, _ in props):
            raise CloudParseError(f"vertex element lacks '{axis}' property", line=1)
    if trailing_elements:
        log.warning("ignoring non-vertex elements in %s: %s", path, trailing_elements)

    dtype = np.dtype([(name, "<" + code if code[0] == "f" or code in
                       ("i2", "i4", "u2", "u4") else code) for name, code in props])
    if binary:
        need = vertex_count * dtype.itemsize
        body = raw[header_end:header_end + need]
        if len(body) < need:
            raise CloudParseError(
                f"body truncated: expected {need} bytes for {vertex_count} vertices",
                offset=header_end + len(body))
        data = np.frombuffer(body, dtype=dtype, count=vertex_count)
    else:
        text_lines = raw[header_end:].decode("ascii", errors="replace").splitlines()
        rows = [ln.split() for ln in text_lines if ln.strip()]
        rows = rows[:vertex_count] if len(rows) > vertex_count else rows
        if len(rows) < vertex_count:
            raise CloudParseError(
                f"body has {len(rows)} rows, header declares {vertex_count}",
                line=len(lines) + len(rows) + 1)
        try:
            data = np.array([tuple(r[:len(props)]) for r in rows], dtype=dtype)
        except ValueError as exc:
            raise CloudParseError(f"bad vertex row: {exc}", line=len(lines) + 1) from None

    known = {"x", "y", "z", "red", "green", "blue", "nx", "ny", "nz"}
    unknown = [name for name, _ in props if name not in known]
    if unknown:
        log.warning("skipping unknown vertex properties in %s: %s", path, unknown)

    pts = np.stack([data["x"], data["y"], data["z"]], axis=1).astype(np.float64)
    colors = None
    if all(c in dtype.names for c in ("red", "green", "blue")):
        rgb = np.stack([data["red"], data["green"], data["blue"]], axis=1).astype(np.float64)
        colors = rgb / 255.0 if rgb.max(initial=0) > 1.0 or dtype["red"].kind == "u" else rgb
    normals = None
    if all(c in dtype.names for c in ("nx", "ny", "nz")):
        normals = _clean_normals(
            np.stack([data["nx"], data["ny"], data["nz"]], axis=1).astype(np.float64))
    return PointCloud(pts, colors, normals)


def _clean_normals(normals: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(normals, axis=1)
    if np.any(norms < 1e-12):
        raise CloudParseError("zero-length normal in file")
    return normals / norms[:, None]
