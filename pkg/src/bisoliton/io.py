"""File formats: strip CSV, OBJ meshes and fixed-format CSV reports."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bjorling import BjorlingStrip
from .errors import ConfigError

__all__ = ["MeshOutput", "fmt", "read_strip_csv", "write_strip_csv", "strip_has_derivatives", "write_obj", "write_csv"]

STRIP_HEADER = ["t", "c1", "c2", "c3", "n1", "n2", "n3"]
STRIP_DERIVS = ["dc1", "dc2", "dc3"]


def fmt(v) -> str:
    """Round-trip float formatting (17 significant digits); other values via str."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def read_strip_csv(path) -> BjorlingStrip:
    """Read a strip from CSV with header t,c1,c2,c3,n1,n2,n3[,dc1,dc2,dc3]."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise ConfigError(f"cannot read strip file {str(path)!r}: {err.strerror}", field="strip") from err
    if not rows:
        raise ConfigError(f"strip file {str(path)!r} is empty", field="strip")
    header = [h.strip() for h in rows[0]]
    if header not in (STRIP_HEADER, STRIP_HEADER + STRIP_DERIVS):
        raise ConfigError(f"strip header must be {','.join(STRIP_HEADER)} "
                          f"optionally followed by {','.join(STRIP_DERIVS)}", field="strip", line=1)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ConfigError(f"expected {len(header)} columns, got {len(row)}", field="strip", line=lineno)
        try:
            data.append([float(c) for c in row])
        except ValueError as err:
            raise ConfigError(f"bad number in strip file: {err}", field="strip", line=lineno) from err
    a = np.array(data, dtype=float).reshape(-1, len(header))
    cdot = a[:, 7:10] if len(header) == 10 else None
    return BjorlingStrip.from_samples(a[:, 0], a[:, 1:4], a[:, 4:7], cdot)


def strip_has_derivatives(path) -> bool:
    """True if the strip CSV header carries dc1,dc2,dc3."""
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), [])
    except OSError:
        return False
    return [h.strip() for h in header[7:]] == STRIP_DERIVS


def write_strip_csv(path, strip: BjorlingStrip, derivatives: bool = False) -> None:
    header = STRIP_HEADER + (STRIP_DERIVS if derivatives else [])
    cols = [strip.t[:, None], strip.c, strip.n] + ([strip.cdot] if derivatives else [])
    write_csv(path, header, np.hstack(cols))


def write_csv(path, header, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


@dataclass
class MeshOutput:
    """Quad mesh on a parameter grid with per-vertex attributes.

    ``vertices`` has shape (nv, 3); ``faces`` holds 0-based vertex indices.
    """

    vertices: np.ndarray
    faces: list
    normals: np.ndarray
    regular: np.ndarray
    abs_rs: np.ndarray = field(default=None)

    def __post_init__(self):
        nv = len(self.vertices)
        if len(self.normals) != nv or len(self.regular) != nv:
            raise ValueError("attribute arrays must match the vertex count")
        if self.abs_rs is not None and len(self.abs_rs) != nv:
            raise ValueError("attribute arrays must match the vertex count")
        for f in self.faces:
            if min(f) < 0 or max(f) >= nv:
                raise ValueError("face index out of range")

    @classmethod
    def from_grid(cls, X, normals, regular, abs_rs=None) -> MeshOutput:
        """Mesh from (m, n, 3) arrays; a cell is kept only if its four corners are regular."""
        m, n = X.shape[:2]
        reg = np.asarray(regular, dtype=bool)
        idx = np.arange(m * n).reshape(m, n)
        faces = [
            (idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1])
            for i in range(m - 1) for j in range(n - 1)
            if reg[i, j] and reg[i + 1, j] and reg[i + 1, j + 1] and reg[i, j + 1]
        ]
        return cls(X.reshape(-1, 3), faces, np.asarray(normals).reshape(-1, 3), reg.ravel(),
                   None if abs_rs is None else np.asarray(abs_rs).ravel())


def write_obj(path, mesh: MeshOutput) -> None:
    lines = ["# bisoliton mesh"]
    lines += ["v %s %s %s" % tuple(fmt(float(c)) for c in v) for v in mesh.vertices]
    lines += ["vn %s %s %s" % tuple(fmt(float(c)) for c in v) for v in mesh.normals]
    lines += ["f %d %d %d %d" % tuple(i + 1 for i in f) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
