"""Checks shared by the property tests and the acceptance run."""

import numpy as np

from gridcarve import domains, embed
from gridcarve.analyze import consistency_order
from gridcarve.assemble import ProblemSpec, assemble_linear
from gridcarve.solve import IterConfig, solve, solve_direct_dense

COS = "cos(x)+cos(y)"
SINE = "sin(pi*x)*sin(pi*y)"

# one connected spacing per fixture, every overbar system below 4000 unknowns
LINEAR_CASES = [
    ("astroid", 0.05), ("four_petal", 0.1), ("hump", 0.02), ("parabola", 0.1),
    ("parabola", 0.02), ("pentagon", 0.25), ("rect_minus_rect", 0.25), ("rect_minus_star", 0.25),
    ("sector", 0.05), ("star", 0.125), ("star_minus_star", 0.2), ("triangle", 0.25),
    ("unit_square", 0.05),
]
LAPLACE_CASES = [("triangle", 0.25), ("pentagon", 0.25), ("star", 0.125)]


def mesh(name, dx, variant="overbar"):
    d = domains.load_fixture(name)
    return embed.build_mesh(d, embed.build_rectangle(d, "padded", dx), variant)


def triple_gaps(name, dx, cfg=IterConfig()):
    """``(n, |jacobi - dense|, |gs - dense|)`` for the Poisson problem with solution cos(x)+cos(y)."""
    dp = assemble_linear(ProblemSpec("poisson", COS, f=f"-({COS})"), mesh(name, dx))
    ref = solve_direct_dense(dp).interior_values
    gj = np.max(np.abs(solve(dp, "jacobi", cfg)[0].interior_values - ref))
    gg = np.max(np.abs(solve(dp, "gauss-seidel", cfg)[0].interior_values - ref))
    return dp.n, float(gj), float(gg)


def max_principle_slack(name, dx, variant="overbar", cfg=IterConfig()):
    """How far the Laplace solution strays outside the boundary range (<= 0 when it holds)."""
    dp = assemble_linear(ProblemSpec("poisson", COS), mesh(name, dx, variant))
    fld, _ = solve(dp, "gauss-seidel", cfg)
    b = fld.boundary_values
    u = fld.interior_values
    return float(max(b.min() - u.min(), u.max() - b.max()))


def sine_order():
    return consistency_order(ProblemSpec("poisson", SINE, f=f"-2*pi^2*{SINE}"), SINE, [0.1, 0.05, 0.025])


def parabola_area_errors(levels=(0.1, 0.05, 0.025, 0.0125)):
    d = domains.load_fixture("parabola")
    return [embed.induced_region_area_error(mesh("parabola", dx), d, 8) for dx in levels]


def quadratic_defect(coeffs, name="parabola", dx=0.1, variant="overbar"):
    """Max row residual of the 5-point operator on the exact samples of a quadratic."""
    a, b, c, d, e, g = coeffs
    phi = f"({a})*x^2 + ({b})*x*y + ({c})*y^2 + ({d})*x + ({e})*y + ({g})"
    p = ProblemSpec("poisson", phi, f=f"2*({a}) + 2*({c})")
    m = mesh(name, dx, variant)
    dp = assemble_linear(p, m)
    gx, gy = np.meshgrid(m.grid.xs, m.grid.ys)
    u = a * gx ** 2 + b * gx * gy + c * gy ** 2 + d * gx + e * gy + g
    scale = max(1.0, float(np.max(np.abs(u))))
    return float(np.max(np.abs(dp.residual(u)))), scale
