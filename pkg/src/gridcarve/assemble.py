"""Five-point difference equations on an embedded mesh.

Every linear row is stored as ``L(u) = rhs`` where ``L`` is the second
difference operator as written (negative definite for Poisson). Problems
posed as ``-L(u) = f`` set ``negate=True`` and get ``rhs = -f``. Dirichlet
neighbours are folded into the right-hand side.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .embed import EmbeddedMesh, NodeClass
from .errors import ConfigError, DegenerateCoefficientError, MeshError
from .exprlang import Expr, as_expr, eval_expr
from .field import Field


class Kind(enum.Enum):
    POISSON = "poisson"
    HELMHOLTZ = "helmholtz"
    VARCOEFF = "varcoeff"
    POLLINATOR = "pollinator"


class Mobility(enum.Enum):
    CONSTANT = "constant"
    PROPORTIONAL = "proportional"


def equilibrium_density(k):
    """Larger root of ``-a^2 + a(k+1) - 1/2 = 0`` (the stable uniform state)."""
    disc = (k + 1.0) ** 2 - 2.0
    if disc < 0:
        raise ConfigError(f"no uniform steady state for k={k}")
    return 0.5 * ((k + 1.0) + math.sqrt(disc))


@dataclass(frozen=True)
class ProblemSpec:
    """PDE plus Dirichlet data.

    * poisson:   ``lap(a) = f``
    * helmholtz: ``lap(a) + f*a = g``
    * varcoeff:  ``div(coef grad a) = f``
    * pollinator: ``D1 div(f1(p) grad a) - a^2 + a(k+1) - 1/2 = 0`` with ``p = 2a - 1``

    ``negate`` flips the sign of the differential part (``-lap(a) = f``).
    ``nu`` is the diffusivity used by time-dependent runs.
    """

    kind: Kind
    dirichlet: Expr
    f: Expr | None = None
    g: Expr | None = None
    coef: Expr | None = None
    negate: bool = False
    d1: float = 1.0
    k: float = 0.45
    mobility: Mobility = Mobility.CONSTANT
    exact: Expr | None = None
    initial: Expr | None = None
    nu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "mobility", Mobility(self.mobility))
        for name in ("dirichlet", "f", "g", "coef", "exact", "initial"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, as_expr(val))
        if self.dirichlet is None:
            raise ConfigError("Dirichlet data is required")
        if self.kind is Kind.POLLINATOR:
            if not self.d1 > 0 or not self.k > 0:
                raise ConfigError("pollinator problems need D1 > 0 and k > 0")
        else:
            if self.kind is Kind.POISSON and self.f is None:
                object.__setattr__(self, "f", as_expr(0.0))
            if self.kind is Kind.HELMHOLTZ and (self.f is None or self.g is None):
                raise ConfigError("helmholtz problems need the reaction coefficient f and source g")
            if self.kind is Kind.VARCOEFF and (self.coef is None or self.f is None):
                raise ConfigError("varcoeff problems need coef and f")
        if self.nu <= 0:
            raise ConfigError("nu must be positive")

    @property
    def linear(self):
        return self.kind is not Kind.POLLINATOR


@dataclass(eq=False)
class DiscreteProblem:
    mesh: EmbeddedMesh
    problem: ProblemSpec
    t: float
    index: np.ndarray      # grid-shaped unknown number, -1 elsewhere
    ks: np.ndarray
    js: np.ndarray
    center: np.ndarray
    ce: np.ndarray
    cw: np.ndarray
    cn: np.ndarray
    cs: np.ndarray
    rhs: np.ndarray        # Dirichlet contributions included
    source: np.ndarray     # rhs before folding
    boundary: np.ndarray   # grid-shaped Dirichlet values, NaN off the boundary
    nonlinear: dict | None = field(default=None)

    @property
    def n(self):
        return self.ks.size

    @property
    def xy(self):
        g = self.mesh.grid
        return g.x0 + self.js * g.dx, g.y0 + self.ks * g.dy

    def neighbour_arrays(self):
        """``(nbr, coef)`` in E, W, N, S order; ``nbr`` is -1 for Dirichlet neighbours."""
        idx = self.index
        ks, js = self.ks, self.js
        nbr = np.stack([idx[ks, js + 1], idx[ks, js - 1], idx[ks + 1, js], idx[ks - 1, js]], axis=1)
        coef = np.stack([self.ce, self.cw, self.cn, self.cs], axis=1)
        return nbr.astype(np.int64), coef

    def matrix(self):
        nbr, coef = self.neighbour_arrays()
        rows = np.repeat(np.arange(self.n), 4)
        keep = nbr.ravel() >= 0
        off = sp.csr_matrix((coef.ravel()[keep], (rows[keep], nbr.ravel()[keep])), shape=(self.n, self.n))
        return (off + sp.diags(self.center)).tocsr()

    def grid_values(self, x):
        """Scatter unknown vector ``x`` into a grid array alongside the boundary data."""
        out = self.boundary.copy()
        out[self.ks, self.js] = x
        return out

    def to_field(self, x):
        return Field(self.mesh, self.grid_values(x), self.t)

    def apply(self, u):
        """Left-hand side of every row for grid array ``u`` (boundary not folded)."""
        ks, js = self.ks, self.js
        return (self.center * u[ks, js] + self.ce * u[ks, js + 1] + self.cw * u[ks, js - 1]
                + self.cn * u[ks + 1, js] + self.cs * u[ks - 1, js])

    def residual(self, u):
        """Row residuals for grid array ``u`` (must carry boundary values)."""
        if self.nonlinear is not None:
            return pollinator_residual(self, u)
        return self.apply(u) - self.source

    def dump_rows(self):
        for r in range(self.n):
            yield r, self.center[r], self.ce[r], self.cw[r], self.cn[r], self.cs[r], self.rhs[r]


def _skeleton(m: EmbeddedMesh, p: ProblemSpec, t: float):
    g = m.grid
    ks, js = m.interior_nodes()
    index = np.full(g.shape, -1, dtype=np.int64)
    index[ks, js] = np.arange(ks.size)
    carriers = m.node_class != NodeClass.EXTERIOR
    for dk, dj in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        if not carriers[ks + dk, js + dj].all():
            raise MeshError("an interior node has an exterior neighbour")
    bk, bj = m.boundary_nodes()
    boundary = np.full(g.shape, np.nan)
    boundary[bk, bj] = eval_expr(p.dirichlet, g.x0 + bj * g.dx, g.y0 + bk * g.dy, t)
    return index, ks, js, boundary


def _fold(dp_index, boundary, ks, js, coeffs, rhs):
    for (dk, dj), c in zip(((0, 1), (0, -1), (1, 0), (-1, 0)), coeffs):
        nb = dp_index[ks + dk, js + dj] < 0
        rhs[nb] -= c[nb] * boundary[ks[nb] + dk, js[nb] + dj]
    return rhs


def assemble_linear(p: ProblemSpec, m: EmbeddedMesh, t: float = 0.0) -> DiscreteProblem:
    if not p.linear:
        raise ConfigError(f"{p.kind.value} is not a linear problem")
    g = m.grid
    index, ks, js, boundary = _skeleton(m, p, t)
    x = g.x0 + js * g.dx
    y = g.y0 + ks * g.dy
    n = ks.size
    ix2, iy2 = 1.0 / g.dx ** 2, 1.0 / g.dy ** 2
    sign = -1.0 if p.negate else 1.0
    if p.kind is Kind.VARCOEFF:
        ce = eval_expr(p.coef, x + 0.5 * g.dx, y, t) * ix2
        cw = eval_expr(p.coef, x - 0.5 * g.dx, y, t) * ix2
        cn = eval_expr(p.coef, x, y + 0.5 * g.dy, t) * iy2
        cs = eval_expr(p.coef, x, y - 0.5 * g.dy, t) * iy2
        ce, cw, cn, cs = (np.broadcast_to(c, (n,)).astype(float) for c in (ce, cw, cn, cs))
        center = -(ce + cw + cn + cs)
    else:
        ce = np.full(n, ix2)
        cw = np.full(n, ix2)
        cn = np.full(n, iy2)
        cs = np.full(n, iy2)
        center = np.full(n, -2.0 * ix2 - 2.0 * iy2)
    if p.kind is Kind.HELMHOLTZ:
        source = np.broadcast_to(eval_expr(p.g, x, y, t), (n,)).astype(float)
        reaction = np.broadcast_to(eval_expr(p.f, x, y, t), (n,)).astype(float)
    else:
        source = np.broadcast_to(eval_expr(p.f, x, y, t), (n,)).astype(float)
        reaction = None
    # -L(u) + s*u = f is stored as L(u) - s*u = -f
    source = sign * source
    if reaction is not None:
        center = center + sign * reaction
    rhs =_fold(index, boundary, ks, js, (ce, cw, cn, cs), source.copy())
    return DiscreteProblem(m, p, t, index, ks, js, center, ce, cw, cn, cs, rhs, source, boundary)


def assemble_pollinator(p: ProblemSpec, m: EmbeddedMesh) -> DiscreteProblem:
    """Center-frozen discretization of the reduced pollinator equation.

    The linear part (D1 times the 5-point Laplacian, mobility 1) is stored in
    the row arrays for inspection; the nonlinear terms live in ``nonlinear``.
    """
    if p.kind is not Kind.POLLINATOR:
        raise ConfigError("assemble_pollinator needs a pollinator problem")
    g = m.grid
    index, ks, js, boundary = _skeleton(m, p, 0.0)
    n = ks.size
    ix2, iy2 = p.d1 / g.dx ** 2, p.d1 / g.dy ** 2
    ce = np.full(n, ix2)
    cw = np.full(n, ix2)
    cn = np.full(n, iy2)
    cs = np.full(n, iy2)
    center = np.full(n, -2.0 * (ix2 + iy2))
    source = np.zeros(n)
    rhs = _fold(index, boundary, ks, js, (ce, cw, cn, cs), source.copy())
    nonlinear = {"d1": p.d1, "k": p.k, "proportional": p.mobility is Mobility.PROPORTIONAL}
    return DiscreteProblem(m, p, 0.0, index, ks, js, center, ce, cw, cn, cs, rhs, source,
                           boundary, nonlinear)


def mobility_values(dp: DiscreteProblem, a_center):
    p = 2.0 * a_center - 1.0
    if not dp.nonlinear["proportional"]:
        return np.ones_like(p)
    if np.any(p <= 0):
        raise DegenerateCoefficientError("plant density p = 2a - 1 is not positive at some node")
    return p


def pollinator_residual(dp: DiscreteProblem, u):
    """Left side of the discrete pollinator equation at every interior node."""
    ks, js = dp.ks, dp.js
    g = dp.mesh.grid
    k = dp.nonlinear["k"]
    c = u[ks, js]
    mob = mobility_values(dp, c)
    cij = mob * (u[ks, js + 1] - 2.0 * c + u[ks, js - 1])
    dij = mob * (u[ks + 1, js] - 2.0 * c + u[ks - 1, js])
    return dp.nonlinear["d1"] * (cij / g.dx ** 2 + dij / g.dy ** 2) - c * c + c * (k + 1.0) - 0.5


def plant_density(a):
    """``p = 2a - 1`` pointwise (arrays or Fields)."""
    if isinstance(a, Field):
        return Field(a.mesh, 2.0 * a.values - 1.0, a.t)
    return 2.0 * np.asarray(a) - 1.0


def reduce_plants_herbivores(p_field, k: float):
    """Herbivore density ``h = (1 + p)(1 - p/k)`` from the plant density."""
    if not k > 0:
        raise ValueError("k must be positive")
    if isinstance(p_field, Field):
        v = p_field.values
        return Field(p_field.mesh, (1.0 + v) * (1.0 - v / k), p_field.t)
    v = np.asarray(p_field, dtype=float)
    return (1.0 + v) * (1.0 - v / k)
