"""Uniform grid over a rectangle R and the two meshes carved from it.

``OVERBAR`` (extrapolated) keeps every grid node inside the domain as an
unknown and adds the 4-neighbours outside it as Dirichlet carriers.
``UNDERBAR`` (interpolated) keeps only nodes inside the domain and turns the
outermost of them into Dirichlet carriers.

Nodes are addressed as ``(k, j)`` (row, column) with ``x = x0 + j*dx`` and
``y = y0 + k*dy``; the global order is k-major.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInteriorError, GeometryError, MeshError
from .geometry import DomainSpec, PointClass


class Variant(enum.Enum):
    OVERBAR = "overbar"
    UNDERBAR = "underbar"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


class NodeClass(enum.IntEnum):
    INTERIOR = 0
    BOUNDARY = 1
    EXTERIOR = 2


NODE_LETTER = {NodeClass.INTERIOR: "I", NodeClass.BOUNDARY: "B", NodeClass.EXTERIOR: "E"}

# slack when deciding how many spacings fit in a side of R
_COUNT_SLACK = 1e-9


@dataclass(frozen=True)
class GridSpec:
    x0: float
    y0: float
    x1: float
    y1: float
    dx: float
    dy: float
    mx: int
    my: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise MeshError("grid spacings must be positive")
        if self.mx < 2 or self.my < 2:
            raise MeshError("grid needs at least two intervals per axis")
        tol = 1e-9 * max(abs(self.x1), abs(self.y1), 1.0)
        if self.x0 + self.mx * self.dx < self.x1 - tol or self.y0 + self.my * self.dy < self.y1 - tol:
            raise MeshError("grid does not cover its rectangle")

    @property
    def shape(self):
        return (self.my + 1, self.mx + 1)

    @property
    def xs(self):
        return self.x0 + np.arange(self.mx + 1) * self.dx

    @property
    def ys(self):
        return self.y0 + np.arange(self.my + 1) * self.dy

    def coords(self):
        """Node coordinate arrays of shape ``(my+1, mx+1)``."""
        return np.meshgrid(self.xs, self.ys, indexing="xy")

    def node_xy(self, k, j):
        return self.x0 + j * self.dx, self.y0 + k * self.dy


def _count(side, h):
    return max(2, math.ceil(side / h - _COUNT_SLACK))


def build_rectangle(d: DomainSpec, policy="padded", dx=0.1, dy=None, fixed=None) -> GridSpec:
    """Choose R and the node counts.

    ``policy`` is ``"padded"`` (bounding box grown by one spacing per side)
    or ``"fixed"`` with ``fixed=(x0, y0, x1, y1)``.
    """
    dy = dx if dy is None else dy
    if not (dx > 0 and dy > 0):
        raise MeshError("grid spacings must be positive")
    bx0, by0, bx1, by1 = d.bbox
    if policy == "padded":
        x0, y0, x1, y1 = bx0 - dx, by0 - dy, bx1 + dx, by1 + dy
    elif policy == "fixed":
        if fixed is None:
            raise MeshError("fixed rectangle policy needs the rectangle")
        x0, y0, x1, y1 = map(float, fixed)
        tol = 1e-12 * max(abs(bx1), abs(by1), 1.0)
        if x0 > bx0 + tol or y0 > by0 + tol or x1 < bx1 - tol or y1 < by1 - tol:
            raise GeometryError(f"rectangle {fixed} does not contain the domain bounding box "
                                f"{(bx0, by0, bx1, by1)}")
    else:
        raise MeshError(f"unknown rectangle policy {policy!r}")
    return GridSpec(x0, y0, x1, y1, dx, dy, _count(x1 - x0, dx), _count(y1 - y0, dy))


def _neighbour_any(mask):
    """True where at least one 4-neighbour is set."""
    out = np.zeros_like(mask)
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def _neighbour_all(mask):
    """True where all four neighbours exist and are set."""
    out = np.zeros_like(mask)
    out[1:-1, 1:-1] = mask[:-2, 1:-1] & mask[2:, 1:-1] & mask[1:-1, :-2] & mask[1:-1, 2:]
    return out


@dataclass(frozen=True, eq=False)
class EmbeddedMesh:
    grid: GridSpec
    variant: Variant
    node_class: np.ndarray   # int8, grid-shaped, NodeClass codes
    point_class: np.ndarray  # int8, grid-shaped, PointClass codes

    @property
    def interior(self):
        return self.node_class == NodeClass.INTERIOR

    @property
    def boundary(self):
        return self.node_class == NodeClass.BOUNDARY

    @property
    def interior_count(self):
        return int(np.count_nonzero(self.interior))

    @property
    def boundary_count(self):
        return int(np.count_nonzero(self.boundary))

    def interior_nodes(self):
        """``(k, j)`` index arrays of interior nodes in k-major order."""
        return np.nonzero(self.interior)

    def boundary_nodes(self):
        return np.nonzero(self.boundary)


def classify_grid(d: DomainSpec, g: GridSpec, eps=None):
    xx, yy = g.coords()
    return d.classify(xx, yy, eps)


def build_mesh(d: DomainSpec, g: GridSpec, variant=Variant.OVERBAR, eps=None) -> EmbeddedMesh:
    variant = Variant.parse(variant)
    pc = classify_grid(d, g, eps)
    inside = pc == PointClass.INSIDE
    if not inside.any():
        raise EmptyInteriorError(f"no grid node lies inside the domain (dx={g.dx}, dy={g.dy})")
    edge = np.zeros_like(inside)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    if variant is Variant.OVERBAR:
        if (inside & edge).any():
            raise MeshError("domain reaches the edge of the grid rectangle")
        interior = inside
        boundary = ~interior & _neighbour_any(interior)
    else:
        interior = inside & _neighbour_all(inside)
        boundary = inside & ~interior
        if not interior.any():
            raise EmptyInteriorError(f"interpolated mesh has no interior node (dx={g.dx}, dy={g.dy})")
    nc = np.full(g.shape, NodeClass.EXTERIOR, dtype=np.int8)
    nc[boundary] = NodeClass.BOUNDARY
    nc[interior] = NodeClass.INTERIOR
    return EmbeddedMesh(g, variant, nc, pc)


def check_connectivity(m: EmbeddedMesh) -> bool:
    """Flood fill from the first interior node over 4-adjacent interior nodes."""
    interior = m.interior
    ks, js = np.nonzero(interior)
    if ks.size == 0:
        raise MeshError("mesh has no interior node")
    seen = np.zeros_like(interior)
    seen[ks[0], js[0]] = True
    queue = deque([(int(ks[0]), int(js[0]))])
    ny, nx = interior.shape
    count = 1
    while queue:
        k, j = queue.popleft()
        for kk, jj in ((k - 1, j), (k + 1, j), (k, j - 1), (k, j + 1)):
            if 0 <= kk < ny and 0 <= jj < nx and interior[kk, jj] and not seen[kk, jj]:
                seen[kk, jj] = True
                count += 1
                queue.append((kk, jj))
    return count == ks.size


def stencil_complete(m: EmbeddedMesh) -> bool:
    carriers = m.node_class != NodeClass.EXTERIOR
    return bool(np.all(_neighbour_all(carriers)[m.interior]))


def induced_cells(m: EmbeddedMesh) -> np.ndarray:
    """Cells of G_R whose four corners belong to the mesh, shape ``(my, mx)``.

    For the extrapolated mesh the diagonal "corner" nodes of interior nodes
    count as members, so a domain whose sides lie on grid lines has an
    induced region equal to the domain itself.
    """
    member = m.node_class != NodeClass.EXTERIOR
    if m.variant is Variant.OVERBAR:
        interior = m.interior
        diag = np.zeros_like(interior)
        diag[1:, 1:] |= interior[:-1, :-1]
        diag[1:, :-1] |= interior[:-1, 1:]
        diag[:-1, 1:] |= interior[1:, :-1]
        diag[:-1, :-1] |= interior[1:, 1:]
        member = member | diag
    return member[:-1, :-1] & member[:-1, 1:] & member[1:, :-1] & member[1:, 1:]


def induced_region_area_error(m: EmbeddedMesh, d: DomainSpec, samples_per_cell: int = 16) -> float:
    """Area of the symmetric difference between the induced region and the domain.

    Each cell of G_R is split into ``samples_per_cell**2`` equal sub-cells
    whose midpoints are classified; cell contributions are summed in cell
    order so the result is reproducible.
    """
    if samples_per_cell < 1:
        raise ValueError("samples_per_cell must be >= 1")
    g = m.grid
    s = samples_per_cell
    cells = induced_cells(m)
    offs = (np.arange(s) + 0.5) / s
    sub_x = (g.x0 + (np.arange(g.mx)[:, None] + offs[None, :]) * g.dx).ravel()
    cell_area = g.dx * g.dy
    per_row = np.empty(g.my)
    eps = 0.0
    for k in range(g.my):
        sub_y = g.y0 + (k + offs) * g.dy
        yy, xx = np.meshgrid(sub_y, sub_x, indexing="ij")
        inside = (d.classify(xx, yy, eps) == PointClass.INSIDE)
        # (s, mx*s) -> (mx, s*s) inside counts per cell
        counts = inside.reshape(s, g.mx, s).sum(axis=(0, 2))
        mism = np.where(cells[k], s * s - counts, counts)
        per_row[k] = mism.sum()
    return float(per_row.sum() / (s * s) * cell_area)


def mesh_rows(m: EmbeddedMesh):
    """Rows ``(j, k, x, y, letter)`` of the mesh dump in k-major order."""
    g = m.grid
    xs, ys = g.xs, g.ys
    letters = np.array(["I", "B", "E"])[m.node_class]
    for k in range(g.my + 1):
        for j in range(g.mx + 1):
            yield j, k, xs[j], ys[k], letters[k, j]
