"""Planar domains and inside/boundary/outside classification of points."""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError
from .exprlang import Expr, as_expr, eval_expr


class PointClass(enum.IntEnum):
    INSIDE = 0
    ON_BOUNDARY = 1
    OUTSIDE = 2


# sample resolution used to locate extrema of level-set domains
BBOX_SAMPLES = 2048


class DomainSpec:
    """Base for all domain descriptions. Subclasses are frozen dataclasses."""

    def classify(self, x, y, eps=None):
        """Vectorized classification; returns an int8 array of PointClass codes."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if eps is None:
            eps = default_eps(self)
        return self._classify(x, y, eps)

    def _classify(self, x, y, eps):
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    @functools.cached_property
    def bbox(self):
        """Cached ``bounding_box()``."""
        return self.bounding_box()


def _polygon_is_simple(v):
    n = len(v)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def segments_cross(p1, p2, p3, p4):
        d1 = cross(p3, p4, p1)
        d2 = cross(p3, p4, p2)
        d3 = cross(p1, p2, p3)
        d4 = cross(p1, p2, p4)
        if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 and d2 and d3 and d4:
            return True

        def on_seg(p, q, r):
            return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
                    and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))

        return ((d1 == 0 and on_seg(p3, p4, p1)) or (d2 == 0 and on_seg(p3, p4, p2))
                or (d3 == 0 and on_seg(p1, p2, p3)) or (d4 == 0 and on_seg(p1, p2, p4)))

    for i in range(n):
        a1, a2 = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            if segments_cross(a1, a2, v[j], v[(j + 1) % n]):
                return False
    return True


@dataclass(frozen=True)
class Polygon(DomainSpec):
    """Simple closed polygon; vertex order may be CW or CCW."""

    vertices: tuple

    def __post_init__(self):
        v = tuple((float(px), float(py)) for px, py in self.vertices)
        object.__setattr__(self, "vertices", v)
        if len(v) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        for i in range(len(v)):
            if v[i] == v[(i + 1) % len(v)]:
                raise GeometryError(f"polygon vertices {i} and {(i + 1) % len(v)} coincide")
        if not _polygon_is_simple(v):
            raise GeometryError("polygon edges intersect")

    def _classify(self, x, y, eps):
        v = np.array(self.vertices)
        x1, y1 = v[:, 0], v[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        near = np.zeros_like(inside)
        for i in range(len(v)):
            ax, ay, bx, by = x1[i], y1[i], x2[i], y2[i]
            # half-open crossing rule: a ray through a vertex counts once, which is
            # the same as rotating the ray by an infinitesimal angle
            straddle = (ay > y) != (by > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = ax + (y - ay) * (bx - ax) / (by - ay)
            inside ^= straddle & (x < xcross)
            ex, ey = bx - ax, by - ay
            s = np.clip(((x - ax) * ex + (y - ay) * ey) / (ex * ex + ey * ey), 0.0, 1.0)
            d2 = (x - ax - s * ex) ** 2 + (y - ay - s * ey) ** 2
            near |= d2 <= eps * eps
        out = np.where(inside, PointClass.INSIDE, PointClass.OUTSIDE).astype(np.int8)
        out[near] = PointClass.ON_BOUNDARY
        return out

    def bounding_box(self):
        v = np.array(self.vertices)
        return (float(v[:, 0].min()), float(v[:, 1].min()),
                float(v[:, 0].max()), float(v[:, 1].max()))


def _sampled_bbox(phi, window, samples):
    x0, y0, x1, y1 = window
    xs = np.linspace(x0, x1, samples)
    ys = np.linspace(y0, y1, samples)
    hx = xs[1] - xs[0]
    hy = ys[1] - ys[0]
    xmin = ymin = np.inf
    xmax = ymax = -np.inf
    for lo in range(0, samples, 256):
        yy, xx = np.meshgrid(ys[lo:lo + 256], xs, indexing="ij")
        hit = phi(xx, yy) <= 0.0
        if hit.any():
            xmin = min(xmin, xx[hit].min())
            xmax = max(xmax, xx[hit].max())
            ymin = min(ymin, yy[hit].min())
            ymax = max(ymax, yy[hit].max())
    if not np.isfinite(xmin):
        raise GeometryError("no sample of the search window lies in the domain")
    return (float(xmin - hx), float(ymin - hy), float(xmax + hx), float(ymax + hy))


@dataclass(frozen=True)
class Implicit(DomainSpec):
    """Level set domain: phi < 0 inside, phi = 0 on the boundary.

    ``window`` is the search rectangle used to locate the bounding box by
    dense sampling. ``extent`` short-circuits the sampling when the extrema
    are known analytically.
    """

    phi: Expr
    window: tuple | None = None
    extent: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi", as_expr(self.phi))

    def level(self, x, y):
        return eval_expr(self.phi, x, y, 0.0)

    def _classify(self, x, y, eps):
        phi = np.asarray(self.level(x, y))
        out = np.full(phi.shape, PointClass.OUTSIDE, dtype=np.int8)
        out[phi < -eps] = PointClass.INSIDE
        out[np.abs(phi) <= eps] = PointClass.ON_BOUNDARY
        return out

    def bounding_box(self, samples=BBOX_SAMPLES):
        if self.extent is not None:
            return tuple(float(c) for c in self.extent)
        if self.window is None:
            raise GeometryError("implicit domain needs a search window to locate its bounding box")
        return _sampled_bbox(self.level, self.window, samples)


@dataclass(frozen=True)
class CurveBounded(Implicit):
    """Intersection of constraints ``g_i(x, y) <= 0``.

    The level function is ``max_i g_i``, so a point is on the boundary when
    the most violated constraint is within eps of zero.
    """

    phi: Expr = None
    constraints: tuple = ()

    def __post_init__(self):
        cons = tuple(as_expr(c) for c in self.constraints)
        if not cons:
            raise GeometryError("curve-bounded domain needs at least one constraint")
        object.__setattr__(self, "constraints", cons)

    def level(self, x, y):
        vals = [np.asarray(eval_expr(c, x, y, 0.0)) for c in self.constraints]
        return np.maximum.reduce(np.broadcast_arrays(*vals)) if len(vals) > 1 else vals[0]


@dataclass(frozen=True)
class Difference(DomainSpec):
    """``outer`` with the closure of ``inner`` removed."""

    outer: DomainSpec
    inner: DomainSpec

    def __post_init__(self):
        px, py = _closure_samples(self.inner, 1000)
        cls = self.outer.classify(px, py)
        if np.any(cls != PointClass.INSIDE):
            raise GeometryError("inner domain is not strictly inside the outer domain")

    def _classify(self, x, y, eps):
        co = self.outer._classify(x, y, eps)
        ci = self.inner._classify(x, y, eps)
        out = np.full(co.shape, PointClass.OUTSIDE, dtype=np.int8)
        out[(co == PointClass.INSIDE) & (ci == PointClass.OUTSIDE)] = PointClass.INSIDE
        in_outer_closure = co != PointClass.OUTSIDE
        on_either = (co == PointClass.ON_BOUNDARY) | (ci == PointClass.ON_BOUNDARY)
        out[on_either & in_outer_closure & (ci != PointClass.INSIDE)] = PointClass.ON_BOUNDARY
        return out

    def bounding_box(self):
        return self.outer.bounding_box()


@dataclass(frozen=True)
class Union(DomainSpec):
    """Union of domains with disjoint closures (used for multi-part fixtures)."""

    parts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.parts) < 1:
            raise GeometryError("union needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    def _classify(self, x, y, eps):
        codes = np.stack([p._classify(x, y, eps) for p in self.parts])
        return codes.min(axis=0).astype(np.int8)

    def bounding_box(self):
        boxes = np.array([p.bounding_box() for p in self.parts])
        return (float(boxes[:, 0].min()), float(boxes[:, 1].min()),
                float(boxes[:, 2].max()), float(boxes[:, 3].max()))


def _closure_samples(d, n):
    """Deterministic points of the closure of ``d``: vertices and edge points
    for polygons, an accepted sample lattice otherwise."""
    if isinstance(d, Polygon):
        v = np.array(d.vertices)
        w = np.roll(v, -1, axis=0)
        per = max(1, n // len(v))
        s = np.arange(per) / per
        pts = (v[:, None, :] + s[None, :, None] * (w - v)[:, None, :]).reshape(-1, 2)
        return pts[:, 0], pts[:, 1]
    x0, y0, x1, y1 = d.bounding_box()
    m = int(np.ceil(np.sqrt(4 * n)))
    yy, xx = np.meshgrid(np.linspace(y0, y1, m), np.linspace(x0, x1, m), indexing="ij")
    keep = d.classify(xx, yy) != PointClass.OUTSIDE
    px, py = xx[keep], yy[keep]
    if px.size > n:
        idx = np.linspace(0, px.size - 1, n).astype(int)
        px, py = px[idx], py[idx]
    return px, py


def default_eps(d: DomainSpec) -> float:
    try:
        xmin, ymin, xmax, ymax = d.bbox
    except GeometryError:
        return 1e-9
    return 1e-9 * max(abs(xmax), abs(ymax), 1.0)


def classify_point(d: DomainSpec, x: float, y: float, eps: float | None = None) -> PointClass:
    if eps is not None and eps < 0:
        raise GeometryError("eps must be non-negative")
    return PointClass(int(d.classify(np.float64(x), np.float64(y), eps)))


def bounding_box(d: DomainSpec):
    return d.bounding_box()
