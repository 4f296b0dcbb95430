"""Explicit and implicit time stepping for ``a_t = nu*lap(a) + f`` on an embedded mesh.

Dirichlet values are taken at the end-of-step time for both schemes. The
implicit step solves ``(I - dt*nu*L) u^{n+1} = u^n + dt*f`` with Jacobi,
starting from ``u^n``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .assemble import ProblemSpec
from .embed import EmbeddedMesh
from .errors import NonConvergenceError, TimestepError
from .exprlang import eval_expr
from .field import Field
from .solve import IterConfig

log = logging.getLogger(__name__)


class Scheme(enum.Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"


@dataclass(frozen=True)
class TimeConfig:
    dt: float
    steps: int
    t0: float = 0.0
    nu: float = 1.0
    scheme: Scheme = Scheme.EXPLICIT
    snapshot_times: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        if not self.dt > 0:
            raise TimestepError("dt must be positive")
        if self.steps < 1:
            raise TimestepError("steps must be >= 1")
        if not self.nu > 0:
            raise TimestepError("nu must be positive")
        t_end = self.t0 + self.steps * self.dt
        for ts in self.snapshot_times:
            if ts < self.t0 - self.dt / 2 or ts > t_end + self.dt / 2:
                raise TimestepError(f"snapshot time {ts} lies outside [{self.t0}, {t_end}]")

    def time(self, n):
        return self.t0 + n * self.dt

    def snapshot_steps(self):
        """Map each snapshot time to the first step n with ``|t0 + n*dt - t| <= dt/2``."""
        out = {}
        for ts in self.snapshot_times:
            n = int(np.ceil((ts - self.t0) / self.dt - 0.5))
            n = max(n, 0)
            if abs(self.time(n) - ts) > self.dt / 2:
                n += 1
            out[ts] = n
        return out


def cfl_limit(m: EmbeddedMesh, nu: float = 1.0) -> float:
    """Largest stable forward-Euler step ``1 / (2 nu (1/dx^2 + 1/dy^2))``."""
    if not nu > 0:
        raise TimestepError("nu must be positive")
    g = m.grid
    return 1.0 / (2.0 * nu * (1.0 / g.dx ** 2 + 1.0 / g.dy ** 2))


def _source(p, x, y, t, n):
    if p.f is None:
        return None
    v = np.broadcast_to(eval_expr(p.f, x, y, t), (n,)).astype(float)
    return v if np.any(v != 0.0) else None


def _refresh_boundary(values, m, p, t):
    bk, bj = m.boundary_nodes()
    g = m.grid
    values[bk, bj] = eval_expr(p.dirichlet, g.x0 + bj * g.dx, g.y0 + bk * g.dy, t)


def initial_field(m: EmbeddedMesh, p: ProblemSpec, t0: float = 0.0) -> Field:
    """``p.initial`` on interior nodes (zero if unset), Dirichlet data on boundary nodes."""
    fld = Field.empty(m, t0)
    ks, js = m.interior_nodes()
    g = m.grid
    if p.initial is not None:
        fld.values[ks, js] = eval_expr(p.initial, g.x0 + js * g.dx, g.y0 + ks * g.dy, t0)
    else:
        fld.values[ks, js] = 0.0
    _refresh_boundary(fld.values, m, p, t0)
    return fld


def step_explicit(u: Field, m: EmbeddedMesh, p: ProblemSpec, tc: TimeConfig, n: int) -> Field:
    """Forward Euler from ``t_n`` to ``t_{n+1}``."""
    g = m.grid
    ks, js = m.interior_nodes()
    rx = tc.nu * tc.dt / g.dx ** 2
    ry = tc.nu * tc.dt / g.dy ** 2
    new = kernels.explicit_update(np.ascontiguousarray(u.values), ks, js, rx, ry)
    src = _source(p, g.x0 + js * g.dx, g.y0 + ks * g.dy, tc.time(n), ks.size)
    if src is not None:
        new += tc.dt * src
    out = u.copy()
    out.values[ks, js] = new
    t1 = tc.time(n + 1)
    _refresh_boundary(out.values, m, p, t1)
    out.t = t1
    return out


def _implicit_rows(m, tc):
    g = m.grid
    ks, js = m.interior_nodes()
    index = np.full(g.shape, -1, dtype=np.int64)
    index[ks, js] = np.arange(ks.size)
    nbr = np.stack([index[ks, js + 1], index[ks, js - 1], index[ks + 1, js], index[ks - 1, js]], axis=1)
    rx = tc.nu * tc.dt / g.dx ** 2
    ry = tc.nu * tc.dt / g.dy ** 2
    coef = np.tile(np.array([-rx, -rx, -ry, -ry]), (ks.size, 1))
    diag = np.full(ks.size, 1.0 + 2.0 * rx + 2.0 * ry)
    return ks, js, nbr, coef, diag


def step_implicit(u: Field, m: EmbeddedMesh, p: ProblemSpec, tc: TimeConfig, n: int,
                  cfg: IterConfig = IterConfig(), _rows=None) -> Field:
    """Backward Euler from ``t_n`` to ``t_{n+1}``; the linear system is solved by Jacobi."""
    g = m.grid
    ks, js, nbr, coef, diag = _rows if _rows is not None else _implicit_rows(m, tc)
    t1 = tc.time(n + 1)
    out = u.copy()
    _refresh_boundary(out.values, m, p, t1)
    b = u.values[ks, js].copy()
    src = _source(p, g.x0 + js * g.dx, g.y0 + ks * g.dy, t1, ks.size)
    if src is not None:
        b += tc.dt * src
    for q, (dk, dj) in enumerate(((0, 1), (0, -1), (1, 0), (-1, 0))):
        fold = nbr[:, q] < 0
        b[fold] -= coef[fold, q] * out.values[ks[fold] + dk, js[fold] + dj]
    x, iters, upd = kernels.jacobi(diag, nbr, coef, b, u.values[ks, js], cfg.tol, cfg.max_iter)
    out.values[ks, js] = x
    out.t = t1
    if upd > cfg.tol:
        raise NonConvergenceError(f"implicit step {n}: Jacobi did not converge in {cfg.max_iter} "
                                  f"iterations (last update {upd:.3e})", out)
    return out


@dataclass
class MarchResult:
    final: Field
    snapshots: dict            # snapshot time -> Field
    norms: list                # interior max-norm after each step, starting with step 0


def march(m: EmbeddedMesh, p: ProblemSpec, tc: TimeConfig, cfg: IterConfig = IterConfig(),
          u0: Field | None = None, track_norms=False) -> MarchResult:
    """Run ``tc.steps`` steps, keeping the fields at the snapshot times."""
    u = u0.copy() if u0 is not None else initial_field(m, p, tc.t0)
    want = tc.snapshot_steps()
    by_step = {}
    for ts, n in want.items():
        by_step.setdefault(n, []).append(ts)
    snaps = {}
    norms = []
    rows = _implicit_rows(m, tc) if tc.scheme is Scheme.IMPLICIT else None

    def record(n, fld):
        for ts in by_step.get(n, ()):
            snaps[ts] = fld.copy()
        if track_norms:
            norms.append(float(np.max(np.abs(fld.interior_values))))

    record(0, u)
    for n in range(tc.steps):
        if tc.scheme is Scheme.EXPLICIT:
            u = step_explicit(u, m, p, tc, n)
        else:
            u = step_implicit(u, m, p, tc, n, cfg, rows)
        record(n + 1, u)
    log.info("%s march: %d steps of dt=%g to t=%g", tc.scheme.value, tc.steps, tc.dt, u.t)
    return MarchResult(u, snaps, norms)
