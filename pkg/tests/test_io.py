import numpy as np
import pytest

from gridcarve import io
from gridcarve.assemble import assemble_linear
from gridcarve.embed import NodeClass
from gridcarve.solve import solve

from conftest import parabola_mesh


@pytest.fixture
def solved(parabola_problem):
    dp = assemble_linear(parabola_problem, parabola_mesh("overbar"))
    return dp, solve(dp, "gauss-seidel")[0]


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, -2.5e-300, 1e30, 0.0):
        assert float(io.fmt(v)) == v


def test_mesh_csv(tmp_path):
    m = parabola_mesh("overbar")
    io.write_mesh_csv(m, tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "j,k,x,y,class"
    assert len(lines) == 1 + m.node_class.size
    classes = [ln.split(",")[4] for ln in lines[1:]]
    assert classes.count("I") == 24


def test_field_csv(tmp_path, solved):
    dp, fld = solved
    io.write_field_csv(fld, tmp_path / "f.csv", with_time=True)
    rows = io.read_field_csv(tmp_path / "f.csv")
    assert list(rows[0]) == ["j", "k", "x", "y", "class", "u", "t"]
    for r in rows:
        if r["class"] == "E":
            assert r["u"] == ""
        else:
            k, j = int(r["k"]), int(r["j"])
            assert float(r["u"]) == fld.values[k, j]
        assert float(r["t"]) == 0.0


def test_system_csv(tmp_path, solved):
    dp, _ = solved
    io.write_system_csv(dp, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "row,center,cE,cW,cN,cS,rhs"
    assert len(lines) == dp.n + 1
    first = [float(v) for v in lines[1].split(",")[1:]]
    assert first[0] == pytest.approx(-400.0)


def test_vtk_round_trip(tmp_path, solved):
    _, fld = solved
    io.write_vtk(fld, tmp_path / "f.vtk")
    text = (tmp_path / "f.vtk").read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n")
    assert "DATASET STRUCTURED_POINTS" in text
    (nx, ny), origin, spacing, vals = io.read_vtk(tmp_path / "f.vtk")
    m = fld.mesh
    assert (ny, nx) == m.grid.shape and origin == (m.grid.x0, m.grid.y0)
    ext = m.node_class == NodeClass.EXTERIOR
    assert np.all(vals[ext] == io.VTK_BLANK)
    assert np.array_equal(vals[~ext], fld.values[~ext])


def test_writers_are_deterministic(tmp_path, solved):
    _, fld = solved
    io.write_vtk(fld, tmp_path / "a.vtk")
    io.write_vtk(fld, tmp_path / "b.vtk")
    assert (tmp_path / "a.vtk").read_bytes() == (tmp_path / "b.vtk").read_bytes()
