"""Build DomainSpec objects from config sections and the shipped fixtures."""

from __future__ import annotations

import configparser
import functools
import re
from importlib import resources

from .errors import ConfigError, ExprError, GeometryError
from .exprlang import parse_expr
from .geometry import CurveBounded, Difference, Implicit, Polygon, Union

DOMAIN_KEYS = {
    "polygon": {"type", "vertices"},
    "implicit": {"type", "phi", "window", "extent"},
    "curve_bounded": {"type", "constraints", "window", "extent"},
    "difference": {"type", "outer", "inner"},
    "union": {"type", "parts"},
}

_PAIR = re.compile(r"\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)")


def parse_vertices(text):
    pairs = _PAIR.findall(text)
    leftover = _PAIR.sub("", text).replace(";", "").strip()
    if not pairs or leftover:
        raise ConfigError(f"cannot read vertex list {text!r}; expected '(x, y); (x, y); ...'")
    try:
        return tuple((float(a), float(b)) for a, b in pairs)
    except ValueError as exc:
        raise ConfigError(f"bad vertex coordinate in {text!r}") from exc


def parse_floats(text, count=None, key="value"):
    try:
        vals = tuple(float(v) for v in re.split(r"[,\s]+", text.strip()) if v)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected numbers, got {text!r}") from exc
    if count is not None and len(vals) != count:
        raise ConfigError(f"{key}: expected {count} numbers, got {len(vals)}")
    return vals


def _split_list(text):
    return [part.strip() for part in text.split(";") if part.strip()]


def domain_from_sections(sections, name="domain"):
    """``sections`` maps section names to ``{key: text}`` dicts."""
    if name not in sections:
        raise ConfigError(f"missing section [{name}]")
    sec = dict(sections[name])
    if "fixture" in sec:
        extra = set(sec) - {"fixture"}
        if extra:
            raise ConfigError(f"[{name}] fixture sections take no other keys: {sorted(extra)}")
        return load_fixture(sec["fixture"].strip())
    kind = sec.get("type", "").strip().lower()
    if kind not in DOMAIN_KEYS:
        raise ConfigError(f"[{name}] type must be one of {sorted(DOMAIN_KEYS)}, got {kind!r}")
    unknown = set(sec) - DOMAIN_KEYS[kind]
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(unknown))}")
    try:
        if kind == "polygon":
            return Polygon(parse_vertices(_required(sec, "vertices", name)))
        window = parse_floats(sec["window"], 4, f"{name}.window") if "window" in sec else None
        extent = parse_floats(sec["extent"], 4, f"{name}.extent") if "extent" in sec else None
        if kind == "implicit":
            return Implicit(parse_expr(_required(sec, "phi", name)), window, extent)
        if kind == "curve_bounded":
            cons = tuple(parse_expr(c) for c in _split_list(_required(sec, "constraints", name)))
            return CurveBounded(window=window, extent=extent, constraints=cons)
        if kind == "difference":
            return Difference(domain_from_sections(sections, _required(sec, "outer", name).strip()),
                              domain_from_sections(sections, _required(sec, "inner", name).strip()))
        parts = _split_list(_required(sec, "parts", name))
        return Union(tuple(domain_from_sections(sections, p) for p in parts))
    except ExprError as exc:
        raise ConfigError(f"[{name}] {exc}") from exc
    except GeometryError as exc:
        raise GeometryError(f"[{name}] {exc}") from exc


def _required(sec, key, name):
    if key not in sec:
        raise ConfigError(f"[{name}] missing key {name}.{key}")
    return sec[key]


def fixture_names():
    files = resources.files("gridcarve").joinpath("fixtures").iterdir()
    return sorted(f.name[:-4] for f in files if f.name.endswith(".cfg"))


@functools.lru_cache(maxsize=None)
def load_fixture(name):
    if name not in fixture_names():
        raise ConfigError(f"unknown domain fixture {name!r}; available: {', '.join(fixture_names())}")
    text = resources.files("gridcarve").joinpath("fixtures").joinpath(f"{name}.cfg").read_text()
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.read_string(text, source=f"{name}.cfg")
    sections = {s: dict(cp[s]) for s in cp.sections()}
    return domain_from_sections(sections)
