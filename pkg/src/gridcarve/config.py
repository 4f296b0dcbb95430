"""Run configuration files.

INI-style ``key = value`` pairs in sections ``[domain]``, ``[problem]``,
``[grid]``, ``[solver]``, ``[run]`` and ``[output]``; ``#`` starts a comment.
Domain sub-parts live in ``[domain.<name>]`` sections. Every key is checked
before anything is computed and all violations are reported together.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assemble import Kind, Mobility, ProblemSpec, equilibrium_density
from .domains import domain_from_sections, parse_floats
from .errors import ConfigError, ExprError, GeometryError
from .exprlang import parse_expr
from .solve import DEFAULT_MAX_ITER, DEFAULT_TOL, IterConfig

SECTION_KEYS = {
    "problem": {"kind", "dirichlet", "f", "g", "coef", "negate", "d1", "k", "mobility", "exact",
                "initial", "nu"},
    "grid": {"dx", "dy", "policy", "rect", "variant"},
    "solver": {"method", "tol", "max_iter", "relax", "initial"},
    "run": {"mode", "dx_list", "scheme", "dt", "dt_factor", "steps", "t_end", "t0", "snapshot_times"},
    "output": {"directory", "formats"},
}
MODES = ("steady", "sweep", "timestep")
METHODS = ("gauss-seidel", "jacobi", "direct", "fixed-point")
FORMATS = ("csv", "vtk")


@dataclass
class TimeSettings:
    scheme: str
    dt: float | None
    dt_factor: float | None
    steps: int | None
    t_end: float | None
    t0: float
    snapshot_times: tuple


@dataclass
class RunConfig:
    path: Path
    domain: object
    problem: ProblemSpec
    mode: str
    dx: float | None
    dy: float | None
    policy: str
    rect: tuple | None
    variants: tuple
    method: str
    iter_cfg: IterConfig
    relax: float
    dx_list: tuple = ()
    time: TimeSettings | None = None
    out_dir: Path = Path("out")
    formats: tuple = ("csv",)
    initial: object = "zeros"    # solver start: zeros, boundary_average, equilibrium or a number
    key_lines: dict = field(default_factory=dict, repr=False)


def _key_lines(text):
    """``(section, key) -> line number`` for diagnostics."""
    out = {}
    sec = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            sec = m.group(1).strip()
        elif sec and "=" in s and not s.startswith(("#", ";")):
            out[(sec, s.split("=", 1)[0].strip().lower())] = n
    return out


def _read(text, source):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                   comment_prefixes=("#", ";"), empty_lines_in_values=False)
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: key outside of any [section]") from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate key {exc.section}.{exc.option}") from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate section [{exc.section}]") from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else "?"
        raise ConfigError(f"{source}: line {lineno}: cannot parse {exc.errors[0][1].strip()!r}") from exc
    return {s: dict(cp[s]) for s in cp.sections()}


class _Checker:
    """Collects every violation before raising one ConfigError."""

    def __init__(self, sections, lines, source):
        self.sections = sections
        self.lines = lines
        self.source = source
        self.problems = []

    def fail(self, sec, key, msg):
        line = self.lines.get((sec, key))
        where = f"line {line}: " if line else ""
        self.problems.append(f"{where}{sec}.{key}: {msg}")

    def has(self, sec, key):
        return key in self.sections.get(sec, {})

    def raw(self, sec, key):
        return self.sections.get(sec, {}).get(key)

    def text(self, sec, key, default=None, required=False, choices=None):
        v = self.raw(sec, key)
        if v is None or v.strip() == "":
            if required:
                self.fail(sec, key, "required key is missing")
            return default
        v = v.strip()
        if choices is not None:
            v = v.lower().replace("_", "-") if "-" in "".join(choices) else v.lower()
            if v not in choices:
                self.fail(sec, key, f"must be one of {', '.join(choices)}; got {v!r}")
                return default
        return v

    def number(self, sec, key, default=None, required=False, positive=False, integer=False):
        v = self.text(sec, key, None, required)
        if v is None:
            return default
        try:
            x = float(v)
            if integer:
                if not x.is_integer():
                    raise ValueError
                x = int(x)
        except (ValueError, OverflowError):
            self.fail(sec, key, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
            return default
        if not np.isfinite(x):
            self.fail(sec, key, "must be finite")
            return default
        if positive and x <= 0:
            self.fail(sec, key, f"must be positive, got {v}")
            return default
        return x

    def floats(self, sec, key, count=None, required=False):
        v = self.text(sec, key, None, required)
        if v is None:
            return None
        try:
            return parse_floats(v, count, f"{sec}.{key}")
        except ConfigError as exc:
            self.fail(sec, key, str(exc).split(": ", 1)[-1])
            return None

    def boolean(self, sec, key, default=False):
        v = self.text(sec, key)
        if v is None:
            return default
        low = v.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        self.fail(sec, key, f"expected true/false, got {v!r}")
        return default

    def expr(self, sec, key, required=False):
        v = self.text(sec, key, None, required)
        if v is None:
            return None
        try:
            return parse_expr(v)
        except ExprError as exc:
            self.fail(sec, key, str(exc))
            return None

    def done(self):
        if self.problems:
            raise ConfigError(f"{self.source}: invalid configuration:\n  " + "\n  ".join(self.problems))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, str(path), path)


def parse_config(text, source="<config>", path=None) -> RunConfig:
    sections = _read(text, source)
    lines = _key_lines(text)
    ck = _Checker(sections, lines, source)

    for sec, keys in sections.items():
        if sec == "domain" or sec.startswith("domain."):
            continue
        if sec not in SECTION_KEYS:
            ck.problems.append(f"unknown section [{sec}]")
            continue
        for key in keys:
            if key not in SECTION_KEYS[sec]:
                ck.fail(sec, key, "unknown key")
    if "domain" not in sections:
        ck.problems.append("missing section [domain]")

    mode = ck.text("run", "mode", "steady", choices=MODES)

    # problem
    kind = ck.text("problem", "kind", None, required=True, choices=tuple(k.value for k in Kind))
    kind = Kind(kind) if kind else None
    pk = {}
    for key in ("dirichlet", "f", "g", "coef", "exact", "initial"):
        pk[key] = ck.expr("problem", key)
    negate = ck.boolean("problem", "negate")
    d1 = ck.number("problem", "d1", 1.0, positive=True)
    kk = ck.number("problem", "k", 0.45, positive=True)
    nu = ck.number("problem", "nu", 1.0, positive=True)
    mobility = ck.text("problem", "mobility", "constant", choices=tuple(m.value for m in Mobility))
    if kind is Kind.POLLINATOR:
        if pk["dirichlet"] is None and kk:
            try:
                pk["dirichlet"] = parse_expr(repr(equilibrium_density(kk)))
            except ConfigError as exc:
                ck.fail("problem", "k", str(exc))
        for key in ("f", "g", "coef"):
            if pk[key] is not None:
                ck.fail("problem", key, "not used by pollinator problems")
        if mode != "steady":
            ck.fail("run", "mode", "pollinator problems run in steady mode only")
    elif kind is not None:
        if pk["dirichlet"] is None:
            ck.fail("problem", "dirichlet", "required key is missing")
        if kind is Kind.HELMHOLTZ:
            for key in ("f", "g"):
                if pk[key] is None:
                    ck.fail("problem", key, "required for helmholtz problems")
        if kind is Kind.VARCOEFF:
            for key in ("coef", "f"):
                if pk[key] is None:
                    ck.fail("problem", key, "required for varcoeff problems")
        if kind is not Kind.HELMHOLTZ and pk["g"] is not None:
            ck.fail("problem", "g", "only helmholtz problems take g")
        if kind is not Kind.VARCOEFF and pk["coef"] is not None:
            ck.fail("problem", "coef", "only varcoeff problems take coef")

    # grid
    policy = ck.text("grid", "policy", "padded", choices=("padded", "fixed"))
    if mode == "sweep":
        dx_list = ck.floats("run", "dx_list", required=True) or ()
        if any(v <= 0 for v in dx_list):
            ck.fail("run", "dx_list", "spacings must be positive")
        if ck.has("grid", "dx"):
            ck.fail("grid", "dx", "sweep runs take their spacings from run.dx_list")
        if policy == "fixed":
            ck.fail("grid", "policy", "sweep runs use the padded rectangle policy")
        dx = None
    else:
        dx_list = ()
        if ck.has("run", "dx_list"):
            ck.fail("run", "dx_list", "only used when run.mode = sweep")
        dx = ck.number("grid", "dx", None, required=True, positive=True)
    dy = ck.number("grid", "dy", None, positive=True)
    rect = ck.floats("grid", "rect", 4, required=(policy == "fixed"))
    if rect is not None and policy != "fixed":
        ck.fail("grid", "rect", "only used with grid.policy = fixed")
    if rect is not None and not (rect[2] > rect[0] and rect[3] > rect[1]):
        ck.fail("grid", "rect", "expected x0, y0, x1, y1 with x1 > x0 and y1 > y0")
    variant = ck.text("grid", "variant", "overbar", choices=("overbar", "underbar", "both"))
    variants = (("overbar", "underbar") if variant == "both" else (variant,)) if variant else ()

    # solver
    default_method = "fixed-point" if kind is Kind.POLLINATOR else "gauss-seidel"
    if mode == "timestep":
        default_method = "jacobi"
    method = ck.text("solver", "method", default_method, choices=METHODS)
    if kind is Kind.POLLINATOR and method != "fixed-point":
        ck.fail("solver", "method", "pollinator problems use fixed-point")
    if kind is not None and kind is not Kind.POLLINATOR and method == "fixed-point":
        ck.fail("solver", "method", "fixed-point is for the pollinator problem")
    if mode == "timestep" and method not in ("jacobi", None):
        ck.fail("solver", "method", "implicit steps are solved with jacobi")
    tol = ck.number("solver", "tol", DEFAULT_TOL, positive=True)
    max_iter = ck.number("solver", "max_iter", DEFAULT_MAX_ITER, positive=True, integer=True)
    relax = ck.number("solver", "relax", 1.0)
    if relax is not None and not 0 < relax <= 1:
        ck.fail("solver", "relax", f"must lie in (0, 1], got {relax}")
    init_raw = ck.text("solver", "initial", "zeros")
    initial = "zeros"
    if init_raw is not None:
        low = init_raw.lower().replace("-", "_")
        if low in ("zeros", "boundary_average"):
            initial = low
        elif low == "equilibrium":
            initial = "equilibrium"
            if kind is not Kind.POLLINATOR:
                ck.fail("solver", "initial", "equilibrium is only defined for pollinator problems")
        else:
            try:
                initial = float(init_raw)
            except ValueError:
                ck.fail("solver", "initial", "expected zeros, boundary_average, equilibrium or a number")

    # time
    time = None
    if mode == "timestep":
        if kind is not None and kind is not Kind.POISSON:
            ck.fail("problem", "kind", "timestep runs march a_t = nu*lap(a) + f (kind = poisson)")
        scheme = ck.text("run", "scheme", None, required=True, choices=("explicit", "implicit"))
        dt = ck.number("run", "dt", None, positive=True)
        dt_factor = ck.number("run", "dt_factor", None, positive=True)
        if ck.has("run", "dt") == ck.has("run", "dt_factor"):
            ck.problems.append("run.dt / run.dt_factor: give exactly one of them")
        steps = ck.number("run", "steps", None, positive=True, integer=True)
        t_end = ck.number("run", "t_end", None)
        if ck.has("run", "steps") == ck.has("run", "t_end"):
            ck.problems.append("run.steps / run.t_end: give exactly one of them")
        t0 = ck.number("run", "t0", 0.0)
        snaps = ck.floats("run", "snapshot_times") or ()
        time = TimeSettings(scheme, dt, dt_factor, steps, t_end, t0, tuple(snaps))
    else:
        for key in ("scheme", "dt", "dt_factor", "steps", "t_end", "t0", "snapshot_times"):
            if ck.has("run", key):
                ck.fail("run", key, "only used when run.mode = timestep")

    out_dir = ck.text("output", "directory", "out")
    formats = tuple(f.strip().lower() for f in (ck.text("output", "formats", "csv") or "csv").split(",")
                    if f.strip())
    for f in formats:
        if f not in FORMATS:
            ck.fail("output", "formats", f"unknown format {f!r}; use {', '.join(FORMATS)}")

    # domain last: its errors are reported alongside the others
    domain = None
    if "domain" in sections:
        try:
            domain = domain_from_sections(sections)
        except ConfigError as exc:
            ck.problems.append(f"domain: {exc}")
        except GeometryError as exc:
            # a well-formed but invalid shape is a geometry failure unless other keys are wrong too
            if not ck.problems:
                raise GeometryError(f"{source}: {exc}") from exc
            ck.problems.append(f"domain: {exc}")
    ck.done()

    try:
        problem = ProblemSpec(kind, pk["dirichlet"], f=pk["f"], g=pk["g"], coef=pk["coef"], negate=negate,
                              d1=d1, k=kk, mobility=mobility, exact=pk["exact"], initial=pk["initial"],
                              nu=nu)
        iter_cfg = IterConfig(tol, int(max_iter), initial if initial in ("zeros", "boundary_average")
                              else "zeros")
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    cfg = RunConfig(Path(path) if path else Path(source), domain, problem, mode, dx, dy, policy, rect,
                    variants, method, iter_cfg, relax, tuple(dx_list), time,
                    Path(out_dir), formats, initial, lines)
    return cfg
