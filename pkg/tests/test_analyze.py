import math

import numpy as np
import pytest

from gridcarve import domains, embed, geometry
from gridcarve.analyze import (SWEEP_COLUMNS, consistency_order, error_inf, extrema_interior,
                               read_sweep_csv, run_sweep, truncation_error)
from gridcarve.assemble import ProblemSpec
from gridcarve.errors import DisconnectedInteriorError
from gridcarve.timestep import initial_field

from conftest import parabola_mesh

SINE = "sin(pi*x)*sin(pi*y)"


def test_error_inf_sampled_exact_and_single_perturbation(parabola_problem):
    m = parabola_mesh("overbar")
    fld = initial_field(m, ProblemSpec("poisson", "(x+y)^2", initial="(x+y)^2"))
    assert error_inf(fld, "(x+y)^2") == 0.0
    ks, js = m.interior_nodes()
    fld.values[ks[5], js[5]] += 0.5
    assert error_inf(fld, "(x+y)^2") == pytest.approx(0.5, abs=1e-15)


def test_extrema_constant_field_tie_break():
    m = parabola_mesh("overbar")
    fld = initial_field(m, ProblemSpec("poisson", "3", initial="3"))
    lo, hi = extrema_interior(fld)
    ks, js = m.interior_nodes()
    first = (m.grid.x0 + js[0] * m.grid.dx, m.grid.y0 + ks[0] * m.grid.dy)
    assert lo.value == hi.value == 3.0
    assert (lo.x, lo.y) == (hi.x, hi.y) == pytest.approx(first)
    assert ks[0] == ks.min()


def test_extrema_ignore_boundary_nodes():
    m = parabola_mesh("overbar")
    fld = initial_field(m, ProblemSpec("poisson", "100", initial="x"))
    lo, hi = extrema_interior(fld)
    assert hi.value < 100


def test_order_sine_is_two():
    fit = consistency_order(ProblemSpec("poisson", SINE, f=f"-2*pi^2*{SINE}"), SINE, [0.1, 0.05, 0.025])
    assert not fit.exact and abs(fit.order - 2.0) <= 0.1


def test_order_helmholtz_and_varcoeff():
    p = ProblemSpec("helmholtz", SINE, f="3", g=f"(3-2*pi^2)*{SINE}")
    assert abs(consistency_order(p, SINE, [0.1, 0.05, 0.025]).order - 2.0) <= 0.1
    q = ProblemSpec("varcoeff", "0", coef="1+x^2", f="2*x*2*x + (1+x^2)*2*0 + (1+x^2)*2")
    fit = consistency_order(q, "x^2", [0.1, 0.05, 0.025])
    assert fit.order >= 1.9 or fit.exact


@pytest.mark.parametrize("phi, f", [("(x+y)^2", "4"), ("x", "0"), ("3*x*y - y^2 + 7", "-2")])
def test_order_sentinel_for_exact_operator(phi, f):
    fit = consistency_order(ProblemSpec("poisson", phi, f=f), phi, [0.1, 0.05, 0.025])
    assert fit.exact and math.isinf(fit.order)


def test_order_needs_three_levels():
    with pytest.raises(ValueError):
        consistency_order(ProblemSpec("poisson", SINE, f="0"), SINE, [0.1, 0.05])


def test_truncation_error_scale():
    err, _ = truncation_error(ProblemSpec("poisson", SINE, f=f"-2*pi^2*{SINE}"), SINE, 0.05)
    # leading term dx^2/12 * (phi_xxxx + phi_yyyy) has max 2*pi^4/12
    assert err == pytest.approx(0.05 ** 2 * 2 * math.pi ** 4 / 12, rel=0.02)


@pytest.mark.parametrize("variant", ["overbar", "underbar"])
def test_extrema_gap_shrinks(parabola, parabola_problem, variant):
    rep = run_sweep(parabola, parabola_problem, [0.1, 0.05, 0.025, 0.0125], variant, samples_per_cell=0)
    top = [4.0 - v for v in rep.column("u_max")]
    bottom = rep.column("u_min")
    assert all(b < a for a, b in zip(top, top[1:]))
    assert all(b < a for a, b in zip(bottom, bottom[1:]))
    its = rep.column("iterations")
    assert all(b >= a for a, b in zip(its, its[1:]))
    for r in rep.rows:
        assert r.error_inf <= 1e-9
        for x, y in ((r.x_min, r.y_min), (r.x_max, r.y_max)):
            assert geometry.classify_point(parabola, x, y) is geometry.PointClass.INSIDE


def test_single_level_and_order(parabola, parabola_problem, tmp_path):
    rep = run_sweep(parabola, parabola_problem, [0.05, 0.1], "overbar")
    assert rep.column("dx") == [0.1, 0.05]
    one = run_sweep(parabola, parabola_problem, [0.1], "overbar")
    assert len(one.rows) == 1
    one.write_csv(tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == ",".join(SWEEP_COLUMNS)
    assert read_sweep_csv(tmp_path / "s.csv") == one.rows


def test_sweep_reproducible(parabola, parabola_problem):
    a = run_sweep(parabola, parabola_problem, [0.1, 0.06], "underbar")
    b = run_sweep(parabola, parabola_problem, [0.1, 0.06], "underbar")
    assert a.rows == b.rows


def test_sweep_failure_keeps_partial_report():
    star = domains.load_fixture("star")
    p = ProblemSpec("poisson", "cos(x)+cos(y)")
    with pytest.raises(DisconnectedInteriorError, match="sweep level dx=0.25") as info:
        run_sweep(star, p, [0.5, 0.125, 0.25], "overbar", samples_per_cell=0)
    partial = info.value.sweep_report
    assert partial.column("dx") == [0.5] and "interior not connected" in partial.failure


def test_area_error_decreases(parabola):
    errs = []
    for dx in (0.1, 0.05, 0.025, 0.0125):
        m = embed.build_mesh(parabola, embed.build_rectangle(parabola, "padded", dx), "overbar")
        errs.append(embed.induced_region_area_error(m, parabola, 8))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert np.all(np.isfinite(errs))
