"""Time the numba kernels against the numpy/scipy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each case is run once untimed per backend (numba compiles there), then the
best of N timed runs is reported together with the max difference between
the two backends' results.
"""

import argparse
import time

import numpy as np

from gridcarve import _accel, domains, embed
from gridcarve.assemble import ProblemSpec, assemble_linear, assemble_pollinator, equilibrium_density
from gridcarve.solve import IterConfig, solve, solve_fixed_point
from gridcarve.timestep import TimeConfig, cfl_limit, march

COS = "cos(4*pi*x)+cos(4*pi*y)"


def mesh(name, dx):
    d = domains.load_fixture(name)
    return embed.build_mesh(d, embed.build_rectangle(d, "padded", dx), "overbar")


def cases():
    sq = mesh("unit_square", 0.02)
    dp = assemble_linear(ProblemSpec("poisson", COS, f=f"-16*pi^2*({COS})"), sq)
    heat = ProblemSpec("poisson", "sin(t)*(sin(pi*x)+sin(pi*y))")
    tc = TimeConfig(0.9 * cfl_limit(sq), 1000)
    tci = TimeConfig(9 * cfl_limit(sq), 100, scheme="implicit")
    af = equilibrium_density(0.45)
    pol = assemble_pollinator(ProblemSpec("pollinator", f"{af!r} + 0.05*sin(x)*cos(y)", d1=10, k=0.45),
                              mesh("star", 0.2))
    return {
        f"jacobi, square dx=0.02 ({dp.n} unknowns)": lambda: solve(dp, "jacobi")[0].interior_values,
        f"gauss-seidel, square dx=0.02 ({dp.n} unknowns)": lambda: solve(dp, "gauss-seidel")[0].interior_values,
        "explicit heat, 1000 steps": lambda: march(sq, heat, tc).final.interior_values,
        "implicit heat, 100 steps": lambda: march(sq, heat, tci).final.interior_values,
        f"pollinator fixed point, star ({pol.n} unknowns)":
            lambda: solve_fixed_point(pol, IterConfig(initial="boundary_average"))[0].interior_values,
    }


def best_of(fn, repeat):
    out = fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    before = _accel.backend()
    print(f"{'case':52s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s} {'max diff':>9s}")
    try:
        for name, fn in cases().items():
            res = {}
            for b in ("numba", "numpy"):
                _accel.set_backend(b)
                res[b] = best_of(fn, args.repeat)
            tn, xn = res["numba"]
            tp, xp = res["numpy"]
            print(f"{name:52s} {tn:9.4f} {tp:9.4f} {tp / tn:8.1f} {np.max(np.abs(xn - xp)):9.1e}")
    finally:
        _accel.set_backend(before)


if __name__ == "__main__":
    main()
