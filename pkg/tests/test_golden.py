"""Reference tables for the parabolic Poisson problem and the CLI regression baselines."""

import csv
import shutil

import pytest

from gridcarve import cli
from gridcarve.analyze import read_sweep_csv, run_sweep
from gridcarve.assemble import assemble_linear
from gridcarve.solve import solve

from conftest import CONFIGS, GOLDEN, parabola_mesh


def read(name):
    with open(GOLDEN / name, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("variant", ["overbar", "underbar"])
def test_node_table(parabola_problem, variant):
    m = parabola_mesh(variant)
    fld, _ = solve(assemble_linear(parabola_problem, m), "gauss-seidel")
    want = {(int(r["i"]) - 1, int(r["j"]) - 1): r for r in read("parabola_nodes_dx0.1.csv")
            if r[f"u_{variant}"]}
    ks, js = m.interior_nodes()
    assert set(zip(ks.tolist(), js.tolist())) == set(want)
    g = m.grid
    for (k, j), r in want.items():
        assert f"{g.x0 + j * g.dx:.4f}" == r["x"] and f"{g.y0 + k * g.dy:.4f}" == r["y"]
        assert f"{fld.values[k, j]:.4f}" == r[f"u_{variant}"]


@pytest.mark.parametrize("variant", ["overbar", "underbar"])
def test_sweep_table(parabola, parabola_problem, variant):
    table = read(f"parabola_table_{variant}.csv")
    rep = run_sweep(parabola, parabola_problem, [float(r["dx"]) for r in table], variant, samples_per_cell=0)
    for row, want in zip(rep.rows, table):
        got = (f"{row.u_min:.4f}", f"{row.x_min:.4f}", f"{row.y_min:.4f}",
               f"{row.u_max:.4f}", f"{row.x_max:.4f}", f"{row.y_max:.4f}")
        assert got == tuple(want[c] for c in ("u_min", "x_min", "y_min", "u_max", "x_max", "y_max"))
        # the tables print round-off (1e-16 to 1e-14); the stopping rule bounds ours at 1e-9
        assert row.error_inf <= 1e-9
    its = rep.column("iterations")
    assert its == sorted(its)


def test_cli_sweep_matches_baseline(capsys, tmp_path):
    assert cli.main(["sweep", str(CONFIGS / "parabola_sweep.cfg"), "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    for variant in ("overbar", "underbar"):
        got = read_sweep_csv(tmp_path / f"sweep_{variant}.csv")
        want = read_sweep_csv(GOLDEN / f"parabola_sweep_{variant}.csv")
        assert len(got) == len(want)
        for a, b in zip(got, want):
            assert (a.dx, a.variant, a.x_min, a.y_min, a.x_max, a.y_max) == \
                (b.dx, b.variant, b.x_min, b.y_min, b.x_max, b.y_max)
            assert a.u_min == pytest.approx(b.u_min, abs=1e-11)
            assert a.u_max == pytest.approx(b.u_max, abs=1e-11)
            assert a.area_error == b.area_error
            assert a.error_inf <= 1e-9
            assert abs(a.iterations - b.iterations) <= max(2, b.iterations // 100)


def refresh_baselines(out):
    """Regenerate the sweep baselines (run by hand after an intended change)."""
    cli.main(["sweep", str(CONFIGS / "parabola_sweep.cfg"), "--out", str(out)])
    for variant in ("overbar", "underbar"):
        shutil.copy(out / f"sweep_{variant}.csv", GOLDEN / f"parabola_sweep_{variant}.csv")
