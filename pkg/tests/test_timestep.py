import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridcarve import domains, embed
from gridcarve.assemble import ProblemSpec
from gridcarve.errors import NonConvergenceError, TimestepError
from gridcarve.field import Field
from gridcarve.solve import IterConfig
from gridcarve.timestep import (Scheme, TimeConfig, cfl_limit, initial_field, march, step_explicit,
                                step_implicit)

ZERO = ProblemSpec("poisson", "0")


def square_mesh(dx):
    sq = domains.load_fixture("unit_square")
    return embed.build_mesh(sq, embed.build_rectangle(sq, "padded", dx), "overbar")


def random_field(m, seed, amp=1.0):
    fld = initial_field(m, ZERO)
    ks, js = m.interior_nodes()
    fld.values[ks, js] = np.random.default_rng(seed).uniform(-amp, amp, ks.size)
    return fld


def test_cfl_limit():
    assert cfl_limit(square_mesh(0.1)) == pytest.approx(0.0025, rel=1e-12)
    assert cfl_limit(square_mesh(0.1), 2.0) == pytest.approx(0.00125, rel=1e-12)
    assert cfl_limit(square_mesh(0.004)) == pytest.approx(4e-6, rel=1e-12)
    with pytest.raises(TimestepError):
        cfl_limit(square_mesh(0.1), 0.0)


def test_time_config_validation():
    with pytest.raises(TimestepError):
        TimeConfig(0.0, 10)
    with pytest.raises(TimestepError):
        TimeConfig(0.1, 0)
    with pytest.raises(TimestepError):
        TimeConfig(0.1, 10, snapshot_times=(5.0,))


def test_snapshot_rounding():
    tc = TimeConfig(0.0009, 400, snapshot_times=(0.0096, 0.1052, 0.3548))
    steps = tc.snapshot_steps()
    for ts, n in steps.items():
        assert abs(tc.time(n) - ts) <= tc.dt / 2
    assert steps[0.0096] == 11
    assert TimeConfig(0.1, 4, snapshot_times=(0.0,)).snapshot_steps() == {0.0: 0}


@pytest.mark.parametrize("scheme", list(Scheme))
def test_zero_and_constant_fields(backend, scheme):
    m = square_mesh(0.1)
    tc = TimeConfig(0.9 * cfl_limit(m), 20, scheme=scheme)
    assert np.all(march(m, ZERO, tc).final.interior_values == 0.0)
    const = ProblemSpec("poisson", "2.5", initial="2.5")
    fin = march(m, const, tc).final.interior_values
    assert np.max(np.abs(fin - 2.5)) <= 1e-12


def test_explicit_backends_agree():
    from gridcarve import _accel

    m = square_mesh(0.05)
    tc = TimeConfig(0.9 * cfl_limit(m), 50)
    before = _accel.backend()
    out = []
    try:
        for b in ("numba", "numpy") if _accel.HAVE_NUMBA else ("numpy",):
            _accel.set_backend(b)
            out.append(march(m, ZERO, tc, u0=random_field(m, 3)).final.interior_values)
    finally:
        _accel.set_backend(before)
    assert np.array_equal(out[0], out[-1])


def test_implicit_step_matches_dense_oracle(backend):
    m = square_mesh(0.1)
    tc = TimeConfig(50 * cfl_limit(m), 1, scheme="implicit")
    u0 = random_field(m, 11)
    got = step_implicit(u0, m, ZERO, tc, 0, IterConfig(tol=1e-15)).interior_values
    ks, js = m.interior_nodes()
    n = ks.size
    idx = {(k, j): i for i, (k, j) in enumerate(zip(ks, js))}
    r = tc.dt / m.grid.dx ** 2
    a = np.eye(n) * (1 + 4 * r)
    for i, (k, j) in enumerate(zip(ks, js)):
        for nb in ((k, j + 1), (k, j - 1), (k + 1, j), (k - 1, j)):
            if nb in idx:
                a[i, idx[nb]] = -r
    ref = np.linalg.solve(a, u0.interior_values)
    assert np.max(np.abs(got - ref)) <= 1e-12
    assert np.max(np.abs(got)) < np.max(np.abs(u0.interior_values))


def test_implicit_non_convergence_names_step():
    m = square_mesh(0.1)
    tc = TimeConfig(100 * cfl_limit(m), 3, scheme="implicit")
    with pytest.raises(NonConvergenceError, match="implicit step 0"):
        march(m, ZERO, tc, IterConfig(max_iter=2), u0=random_field(m, 1))


def test_sine_mode_decays_monotonically(backend):
    m = square_mesh(0.05)
    p = ProblemSpec("poisson", "0", initial="sin(pi*x)*sin(2*pi*y)")
    res = march(m, p, TimeConfig(100 * cfl_limit(m), 50, scheme="implicit"), track_norms=True)
    assert all(b < a for a, b in zip(res.norms, res.norms[1:]))


def test_source_and_time_dependent_boundary():
    # u = t + x^2 solves u_t = lap(u) + f with f = -1; both schemes are exact in time
    # for a linear-in-time solution and exact in space for a quadratic
    m = square_mesh(0.1)
    p = ProblemSpec("poisson", "t + x^2", f="-1", initial="x^2")
    for scheme, factor in ((Scheme.EXPLICIT, 0.9), (Scheme.IMPLICIT, 5.0)):
        tc = TimeConfig(factor * cfl_limit(m), 20, scheme=scheme)
        fin = march(m, p, tc, IterConfig(tol=1e-15)).final
        ks, js = m.interior_nodes()
        x = m.grid.x0 + js * m.grid.dx
        assert np.max(np.abs(fin.interior_values - (fin.t + x ** 2))) <= 1e-11


def test_snapshots_are_recorded():
    m = square_mesh(0.1)
    tc = TimeConfig(0.001, 30, snapshot_times=(0.0, 0.0104, 0.03))
    res = march(m, ProblemSpec("poisson", "0", initial="1"), tc)
    assert sorted(res.snapshots) == [0.0, 0.0104, 0.03]
    assert res.snapshots[0.0104].t == pytest.approx(0.010)
    assert res.snapshots[0.03].t == pytest.approx(0.03)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 31), amp=st.floats(0.1, 10.0))
def test_explicit_maximum_principle_per_step(seed, amp):
    m = square_mesh(0.1)
    p = ProblemSpec("poisson", "cos(3*x)*sin(t+y)")
    tc = TimeConfig(cfl_limit(m), 10)
    u = random_field(m, seed, amp)
    for n in range(tc.steps):
        new = step_explicit(u, m, p, tc, n)
        prev = np.concatenate([u.interior_values, u.boundary_values, new.boundary_values])
        vals = new.interior_values
        assert vals.min() >= prev.min() - 1e-12 and vals.max() <= prev.max() + 1e-12
        u = new


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 31))
def test_explicit_stability_dichotomy(seed):
    m = square_mesh(0.05)
    u0 = random_field(m, seed)
    n0 = np.max(np.abs(u0.interior_values))
    stable = march(m, ZERO, TimeConfig(0.9 * cfl_limit(m), 200), u0=u0, track_norms=True)
    assert max(stable.norms) <= n0
    unstable = march(m, ZERO, TimeConfig(1.1 * cfl_limit(m), 200), u0=u0, track_norms=True)
    assert max(unstable.norms) >= 10 * n0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 31), factor=st.floats(1.0, 100.0))
def test_implicit_norm_non_increasing(seed, factor):
    m = square_mesh(0.1)
    res = march(m, ZERO, TimeConfig(factor * cfl_limit(m), 20, scheme="implicit"),
                u0=random_field(m, seed), track_norms=True)
    assert all(b <= a for a, b in zip(res.norms, res.norms[1:]))


def test_scheme_gap_shrinks_with_dt():
    # first order in time: halving both steps roughly halves the gap
    m = square_mesh(0.1)
    p = ProblemSpec("poisson", "sin(t)*(sin(pi*x)+sin(pi*y))")
    gaps = []
    for scale in (1.0, 0.5, 0.25):
        dt = 0.9 * cfl_limit(m) * scale
        t_end = 0.09
        ex = march(m, p, TimeConfig(dt, round(t_end / dt))).final
        im = march(m, p, TimeConfig(10 * dt, round(t_end / (10 * dt)), scheme="implicit"),
                   IterConfig(tol=1e-14)).final
        gaps.append(np.max(np.abs(ex.interior_values - im.interior_values)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert 1.5 < gaps[0] / gaps[1] < 2.7 and 1.5 < gaps[1] / gaps[2] < 2.7


def test_initial_field_boundary_and_interior():
    m = square_mesh(0.1)
    fld = initial_field(m, ProblemSpec("poisson", "x+1", initial="7"), 0.0)
    assert np.all(fld.interior_values == 7.0)
    bk, bj = m.boundary_nodes()
    assert np.allclose(fld.values[bk, bj], m.grid.x0 + bj * m.grid.dx + 1)
    assert isinstance(fld, Field)
