"""CSV and VTK writers. Files carry 17 significant digits so reruns are byte-identical."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .embed import EmbeddedMesh, NodeClass, mesh_rows

VTK_BLANK = -1e30


def fmt(v):
    return format(float(v), ".17g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_mesh_csv(m: EmbeddedMesh, path):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(("j", "k", "x", "y", "class"))
        for j, k, x, y, c in mesh_rows(m):
            w.writerow((j, k, fmt(x), fmt(y), c))


def write_field_csv(fld, path, with_time=False):
    """Mesh rows plus ``u`` (empty at exterior nodes); ``t`` column for snapshots."""
    vals = fld.values
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        head = ["j", "k", "x", "y", "class", "u"]
        if with_time:
            head.append("t")
        w.writerow(head)
        tt = fmt(fld.t)
        for j, k, x, y, c in mesh_rows(fld.mesh):
            u = "" if c == "E" else fmt(vals[k, j])
            row = [j, k, fmt(x), fmt(y), c, u]
            if with_time:
                row.append(tt)
            w.writerow(row)


def read_field_csv(path):
    """Rows as a list of dicts (strings), for tests and plotting scripts."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_system_csv(dp, path):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(("row", "center", "cE", "cW", "cN", "cS", "rhs"))
        for r, *vals in dp.dump_rows():
            w.writerow((r, *(fmt(v) for v in vals)))


def write_vtk(fld, path, name="u"):
    """Legacy ASCII STRUCTURED_POINTS; exterior nodes get the blank value -1e30."""
    m = fld.mesh
    g = m.grid
    vals = np.where(m.node_class == NodeClass.EXTERIOR, VTK_BLANK, fld.values)
    lines = [
        "# vtk DataFile Version 3.0",
        f"gridcarve field {name} t={fmt(fld.t)}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {g.mx + 1} {g.my + 1} 1",
        f"ORIGIN {fmt(g.x0)} {fmt(g.y0)} 0",
        f"SPACING {fmt(g.dx)} {fmt(g.dy)} 1",
        f"POINT_DATA {(g.mx + 1) * (g.my + 1)}",
        f"SCALARS {name} double 1",
        "LOOKUP_TABLE default",
    ]
    lines.extend(fmt(v) for v in vals.ravel())
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk(path):
    """Parse a file written by :func:`write_vtk`; returns ``(dims, origin, spacing, values)``."""
    lines = Path(path).read_text().splitlines()
    head = {ln.split()[0]: ln.split()[1:] for ln in lines[3:10] if ln.strip()}
    nx, ny, _ = (int(v) for v in head["DIMENSIONS"])
    origin = tuple(float(v) for v in head["ORIGIN"][:2])
    spacing = tuple(float(v) for v in head["SPACING"][:2])
    vals = np.array([float(v) for v in lines[10:]]).reshape(ny, nx)
    return (nx, ny), origin, spacing, vals
