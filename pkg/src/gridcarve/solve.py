"""Iterative and direct solvers for assembled problems."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .assemble import DiscreteProblem, mobility_values
from .errors import (DegenerateCoefficientError, NonConvergenceError, SingularMatrixError,
                     SolverError)
from .exprlang import eval_expr
from .field import Field

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-13
DEFAULT_MAX_ITER = 10_000_000
DIRECT_MAX_UNKNOWNS = 4000


@dataclass(frozen=True)
class IterConfig:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    initial: object = "zeros"   # "zeros", "boundary_average" or an array of unknown values

    def __post_init__(self):
        if not self.tol > 0:
            raise SolverError("tol must be positive")
        if self.max_iter < 1:
            raise SolverError("max_iter must be >= 1")
        if isinstance(self.initial, str) and self.initial not in ("zeros", "boundary_average"):
            raise SolverError(f"unknown initial guess {self.initial!r}")


@dataclass(frozen=True)
class Extremum:
    value: float
    x: float
    y: float


@dataclass(frozen=True)
class SolveReport:
    method: str
    iterations: int
    final_update_norm: float
    converged: bool
    residual_norm: float
    error_vs_exact: float | None = None
    minimum: Extremum | None = None
    maximum: Extremum | None = None


def initial_guess(dp: DiscreteProblem, cfg: IterConfig):
    if isinstance(cfg.initial, str):
        if cfg.initial == "zeros":
            return np.zeros(dp.n)
        vals = dp.boundary[np.isfinite(dp.boundary)]
        return np.full(dp.n, float(vals.mean()) if vals.size else 0.0)
    x0 = np.asarray(cfg.initial, dtype=float)
    if x0.shape == dp.mesh.grid.shape:
        x0 = x0[dp.ks, dp.js]
    if x0.shape != (dp.n,):
        raise SolverError(f"initial guess has shape {x0.shape}, expected ({dp.n},)")
    return x0.copy()


def _warn_if_not_dominant(dp):
    off = np.abs(dp.ce) + np.abs(dp.cw) + np.abs(dp.cn) + np.abs(dp.cs)
    if np.any(np.abs(dp.center) < off * (1 - 1e-12)):
        log.warning("system is not diagonally dominant; Jacobi/Gauss-Seidel may diverge")


def _finish(dp, method, x, iters, upd, cfg):
    from .analyze import error_inf, extrema_interior

    fld = dp.to_field(x)
    res = dp.residual(fld.values)
    converged = bool(upd <= cfg.tol)
    err = error_inf(fld, dp.problem.exact) if dp.problem.exact is not None else None
    lo, hi = extrema_interior(fld)
    report = SolveReport(method, int(iters), float(upd), converged,
                         float(np.max(np.abs(res))) if res.size else 0.0, err, lo, hi)
    log.info("%s: %d iterations, update %.3e, residual %.3e", method, iters, upd, report.residual_norm)
    if not converged:
        raise NonConvergenceError(f"{method} did not converge in {cfg.max_iter} iterations "
                                  f"(last update {upd:.3e})", fld, report)
    return fld, report


def _linear_iterate(dp, cfg, method, kernel):
    if dp.nonlinear is not None:
        raise SolverError(f"{method} needs a linear problem")
    _warn_if_not_dominant(dp)
    nbr, coef = dp.neighbour_arrays()
    x, iters, upd = kernel(dp.center, nbr, coef, dp.rhs, initial_guess(dp, cfg), cfg.tol, cfg.max_iter)
    return _finish(dp, method, x, iters, upd, cfg)


def solve_jacobi(dp: DiscreteProblem, cfg: IterConfig = IterConfig()):
    return _linear_iterate(dp, cfg, "jacobi", kernels.jacobi)


def solve_gauss_seidel(dp: DiscreteProblem, cfg: IterConfig = IterConfig()):
    return _linear_iterate(dp, cfg, "gauss-seidel", kernels.gauss_seidel)


def solve_direct_dense(dp: DiscreteProblem) -> Field:
    """Dense LU with partial pivoting; used as the verification oracle."""
    if dp.nonlinear is not None:
        raise SolverError("direct solve needs a linear problem")
    if dp.n > DIRECT_MAX_UNKNOWNS:
        raise SolverError(f"dense oracle limited to {DIRECT_MAX_UNKNOWNS} unknowns, got {dp.n}")
    a = dp.matrix().toarray()
    try:
        x = np.linalg.solve(a, dp.rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    res = np.max(np.abs(a @ x - dp.rhs)) if dp.n else 0.0
    scale = max(1.0, float(np.max(np.abs(dp.rhs))) if dp.n else 1.0)
    if not np.isfinite(res) or res > 1e-9 * scale * max(1.0, float(np.max(np.abs(a)))):
        raise SingularMatrixError(f"direct solve residual {res:.3e} too large; matrix is near singular")
    return dp.to_field(x)


def solve(dp: DiscreteProblem, method="gauss-seidel", cfg: IterConfig = IterConfig(), relax=1.0):
    method = method.replace("_", "-").lower()
    if dp.nonlinear is not None:
        return solve_fixed_point(dp, cfg, relax)
    if method == "jacobi":
        return solve_jacobi(dp, cfg)
    if method in ("gauss-seidel", "gs"):
        return solve_gauss_seidel(dp, cfg)
    if method == "direct":
        from .analyze import error_inf, extrema_interior

        fld = solve_direct_dense(dp)
        err = error_inf(fld, dp.problem.exact) if dp.problem.exact is not None else None
        lo, hi = extrema_interior(fld)
        res = dp.residual(fld.values)
        return fld, SolveReport("direct", 0, 0.0, True, float(np.max(np.abs(res))), err, lo, hi)
    raise SolverError(f"unknown method {method!r}")


def solve_fixed_point(dp: DiscreteProblem, cfg: IterConfig = IterConfig(), relax: float = 1.0):
    """Damped sweeps ``a <- (1-relax) a + relax G(a)``.

    ``G`` solves each node's quadratic for its own value with the neighbours
    and the mobility ``f1(p)``, ``p = 2a - 1``, frozen at the previous sweep;
    the larger root is taken.
    """
    if dp.nonlinear is None:
        raise SolverError("fixed-point iteration needs the pollinator problem")
    if not 0.0 < relax <= 1.0:
        raise SolverError(f"relax must lie in (0, 1], got {relax}")
    a0 = dp.grid_values(initial_guess(dp, cfg))
    mobility_values(dp, a0[dp.ks, dp.js])
    g = dp.mesh.grid
    nl = dp.nonlinear
    a, iters, upd, status = kernels.pollinator_fixed_point(
        a0, dp.ks, dp.js, nl["d1"], nl["k"], g.dx, g.dy, nl["proportional"], relax, cfg.tol, cfg.max_iter)
    if status == kernels.FP_NONPOSITIVE_MOBILITY:
        raise DegenerateCoefficientError(f"mobility p = 2a - 1 became non-positive after {iters} sweeps")
    if status == kernels.FP_NEGATIVE_DISCRIMINANT:
        raise SolverError(f"node equation has no real root after {iters} sweeps")
    return _finish(dp, "fixed-point", a[dp.ks, dp.js], iters, upd, cfg)


def with_initial(cfg: IterConfig, initial) -> IterConfig:
    return replace(cfg, initial=initial)


def exact_field(dp: DiscreteProblem):
    """Exact solution sampled on interior and boundary nodes."""
    g = dp.mesh.grid
    xx, yy = g.coords()
    vals = eval_expr(dp.problem.exact, xx, yy, dp.t)
    out = np.where(dp.mesh.node_class != 2, vals, np.nan)
    return Field(dp.mesh, out, dp.t)
