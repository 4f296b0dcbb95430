"""Command-line front end.

    gridcarve run <config> [--dump-system] [--out DIR]
    gridcarve sweep <config> [--out DIR]

Exit codes: 0 success, 2 config, 3 geometry, 4 mesh, 5 solver, 6 timestep.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import _accel, embed, io
from .analyze import SweepRow, run_sweep, write_sweep_csv
from .assemble import assemble_linear, assemble_pollinator, equilibrium_density
from .config import RunConfig, load_config
from .errors import DisconnectedInteriorError, GridcarveError
from .solve import solve, with_initial
from .timestep import Scheme, TimeConfig, cfl_limit, march

log = logging.getLogger("gridcarve")


def coord(v):
    """Grid coordinate in short form: ``0.4``, ``0.11``, ``12.5``."""
    return format(round(float(v), 10), "g")


def summary_line(variant, n, rep):
    err = "n/a" if rep.error_vs_exact is None else f"{rep.error_vs_exact:.4e}"
    lo, hi = rep.minimum, rep.maximum
    return (f"{variant}: unknowns={n} iterations={rep.iterations} error={err} "
            f"min={lo.value:.4f} @ ({coord(lo.x)},{coord(lo.y)}) "
            f"max={hi.value:.4f} @ ({coord(hi.x)},{coord(hi.y)})")


def _grid(cfg: RunConfig, dx):
    if cfg.policy == "fixed":
        return embed.build_rectangle(cfg.domain, "fixed", dx, cfg.dy, fixed=cfg.rect)
    return embed.build_rectangle(cfg.domain, "padded", dx, cfg.dy)


def _mesh(cfg, variant, dx):
    m = embed.build_mesh(cfg.domain, _grid(cfg, dx), variant)
    if not embed.check_connectivity(m):
        raise DisconnectedInteriorError(f"{variant}: interior not connected at dx={dx}")
    return m


def _initial(cfg, dp):
    init = cfg.initial
    if init == "equilibrium":
        return with_initial(cfg.iter_cfg, np.full(dp.n, equilibrium_density(cfg.problem.k)))
    if isinstance(init, float):
        return with_initial(cfg.iter_cfg, np.full(dp.n, init))
    return cfg.iter_cfg


def run_steady(cfg: RunConfig, out: Path, dump_system=False, echo=print):
    rows = []
    for variant in cfg.variants:
        m = _mesh(cfg, variant, cfg.dx)
        if cfg.problem.linear:
            dp = assemble_linear(cfg.problem, m)
        else:
            dp = assemble_pollinator(cfg.problem, m)
        if dump_system:
            io.write_system_csv(dp, out / f"system_{variant}.csv")
        fld, rep = solve(dp, cfg.method, _initial(cfg, dp), cfg.relax)
        if "csv" in cfg.formats:
            io.write_mesh_csv(m, out / f"mesh_{variant}.csv")
            io.write_field_csv(fld, out / f"solution_{variant}.csv")
        if "vtk" in cfg.formats:
            io.write_vtk(fld, out / f"solution_{variant}.vtk")
        area = embed.induced_region_area_error(m, cfg.domain, 8)
        err = rep.error_vs_exact if rep.error_vs_exact is not None else float("nan")
        rows.append(SweepRow(m.grid.dx, variant, rep.minimum.value, rep.minimum.x, rep.minimum.y,
                             rep.maximum.value, rep.maximum.x, rep.maximum.y, err, rep.iterations, area))
        echo(summary_line(variant, dp.n, rep))
    write_sweep_csv(rows, out / "report.csv")
    return rows


def run_sweep_mode(cfg: RunConfig, out: Path, echo=print):
    reports = {}
    for variant in cfg.variants:
        try:
            rep = run_sweep(cfg.domain, cfg.problem, cfg.dx_list, variant, cfg.method, cfg.iter_cfg)
        except GridcarveError as exc:
            partial = getattr(exc, "sweep_report", None)
            if partial is not None and partial.rows:
                partial.write_csv(out / f"sweep_{variant}.csv")
            raise
        rep.write_csv(out / f"sweep_{variant}.csv")
        for r in rep.rows:
            err = "n/a" if math.isnan(r.error_inf) else f"{r.error_inf:.4e}"
            echo(f"{variant} dx={coord(r.dx)}: iterations={r.iterations} error={err} "
                 f"min={r.u_min:.4f} @ ({coord(r.x_min)},{coord(r.y_min)}) "
                 f"max={r.u_max:.4f} @ ({coord(r.x_max)},{coord(r.y_max)}) area_error={r.area_error:.4f}")
        reports[variant] = rep
    return reports


def time_config(cfg: RunConfig, m):
    ts = cfg.time
    dt = ts.dt if ts.dt is not None else ts.dt_factor * cfl_limit(m, cfg.problem.nu)
    steps = ts.steps if ts.steps is not None else max(1, math.ceil((ts.t_end - ts.t0) / dt - 1e-9))
    return TimeConfig(dt, steps, ts.t0, cfg.problem.nu, Scheme(ts.scheme), ts.snapshot_times)


def run_timestep(cfg: RunConfig, out: Path, echo=print):
    results = {}
    for variant in cfg.variants:
        m = _mesh(cfg, variant, cfg.dx)
        tc = time_config(cfg, m)
        res = march(m, cfg.problem, tc, cfg.iter_cfg, track_norms=True)
        if "csv" in cfg.formats:
            io.write_mesh_csv(m, out / f"mesh_{variant}.csv")
            for ts, fld in sorted(res.snapshots.items()):
                io.write_field_csv(fld, out / f"snapshot_{variant}_t{coord(ts)}.csv", with_time=True)
            io.write_field_csv(res.final, out / f"final_{variant}.csv", with_time=True)
            with open(out / f"norms_{variant}.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("step", "t", "max_abs"))
                for n, v in enumerate(res.norms):
                    w.writerow((n, io.fmt(tc.time(n)), io.fmt(v)))
        if "vtk" in cfg.formats:
            io.write_vtk(res.final, out / f"final_{variant}.vtk")
        cfl = cfl_limit(m, cfg.problem.nu)
        echo(f"{variant}: {tc.scheme.value} dt={tc.dt:.4e} ({tc.dt / cfl:.4g} x cfl) steps={tc.steps} "
             f"t={res.final.t:.4f} max|u|={res.norms[-1]:.4f}")
        for ts, fld in sorted(res.snapshots.items()):
            echo(f"  snapshot t={coord(ts)} (step time {fld.t:.6g}): max|u|={np.max(np.abs(fld.interior_values)):.4f}")
        results[variant] = res
    return results


def execute(cfg: RunConfig, out=None, dump_system=False, mode=None, echo=print):
    out = Path(out) if out is not None else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    mode = mode or cfg.mode
    _accel.apply_thread_cap()
    if mode == "sweep":
        return run_sweep_mode(cfg, out, echo)
    if mode == "timestep":
        return run_timestep(cfg, out, echo)
    return run_steady(cfg, out, dump_system, echo)


def build_parser():
    ap = argparse.ArgumentParser(prog="gridcarve", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="count", default=0, help="log progress (-vv for debug)")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the mode named in the config")
    r.add_argument("config")
    r.add_argument("--dump-system", action="store_true", help="write the assembled rows as CSV")
    r.add_argument("--out", help="output directory (overrides output.directory)")
    s = sub.add_parser("sweep", help="refinement sweep over run.dx_list")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (overrides output.directory)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "sweep":
            if cfg.mode != "sweep":
                print(f"error: {args.config}: run.mode must be sweep for the sweep command", file=sys.stderr)
                return 2
            execute(cfg, args.out, mode="sweep")
        else:
            execute(cfg, args.out, dump_system=args.dump_system)
    except GridcarveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
