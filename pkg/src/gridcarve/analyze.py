"""Error norms, interior extrema, truncation-order fits and refinement sweeps."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from . import embed
from .assemble import Kind, ProblemSpec, assemble_linear
from .errors import DisconnectedInteriorError, GridcarveError, SolverError
from .exprlang import as_expr, eval_expr
from .field import Field

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("dx", "variant", "u_min", "x_min", "y_min", "u_max", "x_max", "y_max",
                 "error_inf", "iterations", "area_error")


def error_inf(u: Field, exact, mesh=None) -> float:
    """Max over interior nodes of ``|u - exact|``."""
    m = mesh or u.mesh
    exact = as_expr(exact)
    ks, js = m.interior_nodes()
    g = m.grid
    ex = eval_expr(exact, g.x0 + js * g.dx, g.y0 + ks * g.dy, u.t)
    return float(np.max(np.abs(u.values[ks, js] - ex)))


def extrema_interior(u: Field, mesh=None):
    """``(min, max)`` over interior nodes; ties go to the first node in k-major order."""
    from .solve import Extremum

    m = mesh or u.mesh
    ks, js = m.interior_nodes()
    if ks.size == 0:
        raise GridcarveError("no interior node to search")
    vals = u.values[ks, js]
    g = m.grid
    lo = int(np.argmin(vals))
    hi = int(np.argmax(vals))
    return (Extremum(float(vals[lo]), float(g.x0 + js[lo] * g.dx), float(g.y0 + ks[lo] * g.dy)),
            Extremum(float(vals[hi]), float(g.x0 + js[hi] * g.dx), float(g.y0 + ks[hi] * g.dy)))


@dataclass(frozen=True)
class OrderFit:
    order: float
    exact: bool
    dx: tuple
    errors: tuple


def truncation_error(p: ProblemSpec, phi, dx, box=(0.0, 0.0, 1.0, 1.0)):
    """Max-norm of ``L_h phi - F`` over the interior lattice nodes of ``box``.

    ``F`` is the problem's continuous right-hand side, so ``phi`` must solve
    the continuous problem exactly.
    """
    if not p.linear:
        raise SolverError("truncation error is defined for linear problems only")
    phi = as_expr(phi)
    x0, y0, x1, y1 = box
    nx = int(round((x1 - x0) / dx))
    ny = int(round((y1 - y0) / dx))
    xs = x0 + np.arange(1, nx) * dx
    ys = y0 + np.arange(1, ny) * dx
    x, y = np.meshgrid(xs, ys)
    h2 = dx * dx
    sign = -1.0 if p.negate else 1.0

    def ph(a, b):
        return eval_expr(phi, a, b, 0.0)

    c = ph(x, y)
    if p.kind is Kind.VARCOEFF:
        k = p.coef
        lap = (eval_expr(k, x + dx / 2, y) * (ph(x + dx, y) - c) - eval_expr(k, x - dx / 2, y) * (c - ph(x - dx, y))
               + eval_expr(k, x, y + dx / 2) * (ph(x, y + dx) - c)
               - eval_expr(k, x, y - dx / 2) * (c - ph(x, y - dx))) / h2
    else:
        lap = (ph(x + dx, y) + ph(x - dx, y) + ph(x, y + dx) + ph(x, y - dx) - 4.0 * c) / h2
    if p.kind is Kind.HELMHOLTZ:
        lhs = sign * lap + eval_expr(p.f, x, y) * c
        rhs = eval_expr(p.g, x, y)
    else:
        lhs = sign * lap
        rhs = eval_expr(p.f, x, y)
    return float(np.max(np.abs(lhs - rhs))), float(np.max(np.abs(c)))


def consistency_order(p: ProblemSpec, phi, dx_list, box=(0.0, 0.0, 1.0, 1.0)) -> OrderFit:
    """Least-squares slope of log(truncation error) against log(dx).

    When every level sits at round-off (below 1e-13 or the ``|phi|/dx^2``
    cancellation floor) the operator is exact on ``phi``: the fit returns
    ``order=inf`` with ``exact=True``.
    """
    dx_list = sorted(set(float(d) for d in dx_list), reverse=True)
    if len(dx_list) < 3:
        raise ValueError("need at least three spacings")
    errs = []
    exact = True
    for dx in dx_list:
        err, scale = truncation_error(p, phi, dx, box)
        floor = max(1e-13, 64 * np.finfo(float).eps * max(scale, 1.0) / (dx * dx))
        exact &= err <= floor
        errs.append(err)
    if exact:
        return OrderFit(float("inf"), True, tuple(dx_list), tuple(errs))
    slope = np.polyfit(np.log(dx_list), np.log(errs), 1)[0]
    return OrderFit(float(slope), False, tuple(dx_list), tuple(errs))


@dataclass(frozen=True)
class SweepRow:
    dx: float
    variant: str
    u_min: float
    x_min: float
    y_min: float
    u_max: float
    x_max: float
    y_max: float
    error_inf: float
    iterations: int
    area_error: float

    def as_tuple(self):
        return tuple(getattr(self, c) for c in SWEEP_COLUMNS)


@dataclass
class SweepReport:
    rows: list = field(default_factory=list)
    failure: str | None = None

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def write_csv(self, path):
        write_sweep_csv(self.rows, path)


def format_float(v):
    return format(float(v), ".17g")


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([format_float(r.dx), r.variant, *(format_float(v) for v in r.as_tuple()[2:9]),
                        r.iterations, format_float(r.area_error)])


def read_sweep_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(SweepRow(float(rec["dx"]), rec["variant"],
                                 *(float(rec[c]) for c in SWEEP_COLUMNS[2:9]),
                                 int(rec["iterations"]), float(rec["area_error"])))
    return rows


def sweep_level(d, p, dx, variant, method="gauss-seidel", cfg=None, samples_per_cell=8, dy=None):
    """One refinement level of the pipeline; returns ``(row, field, report)``."""
    from .solve import IterConfig, solve

    cfg = cfg or IterConfig()
    variant = embed.Variant.parse(variant)
    g = embed.build_rectangle(d, "padded", dx, dy)
    m = embed.build_mesh(d, g, variant)
    if not embed.check_connectivity(m):
        raise DisconnectedInteriorError(f"interior not connected at dx={dx}")
    dp = assemble_linear(p, m)
    fld, rep = solve(dp, method, cfg)
    area = embed.induced_region_area_error(m, d, samples_per_cell) if samples_per_cell else float("nan")
    err = rep.error_vs_exact if rep.error_vs_exact is not None else float("nan")
    row = SweepRow(float(dx), variant.value, rep.minimum.value, rep.minimum.x, rep.minimum.y,
                   rep.maximum.value, rep.maximum.x, rep.maximum.y, err, rep.iterations, area)
    return row, fld, rep


def run_sweep(d, p: ProblemSpec, dx_list, variant, method="gauss-seidel", cfg=None,
              samples_per_cell=8) -> SweepReport:
    """Pipeline per spacing, coarse to fine. A failing level stops the sweep;
    the rows computed so far are kept and the exception carries the report."""
    report = SweepReport()
    for dx in sorted(dx_list, reverse=True):
        try:
            row, _, _ = sweep_level(d, p, dx, variant, method, cfg, samples_per_cell)
        except GridcarveError as exc:
            report.failure = f"dx={dx}: {exc}"
            exc.sweep_report = report
            exc.args = (f"sweep level dx={dx}: {exc}",)
            raise
        log.info("sweep dx=%g %s: min %.4f max %.4f err %.3e iters %d", dx, row.variant,
                 row.u_min, row.u_max, row.error_inf, row.iterations)
        report.rows.append(row)
    return report
