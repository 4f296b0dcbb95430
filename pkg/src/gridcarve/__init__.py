"""Finite differences on irregular planar domains embedded in a uniform grid."""

from .assemble import Kind, Mobility, ProblemSpec, assemble_linear, assemble_pollinator
from .embed import GridSpec, Variant, build_mesh, build_rectangle
from .errors import GridcarveError
from .exprlang import eval_expr, parse_expr
from .solve import IterConfig, solve

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "GridcarveError", "IterConfig", "Kind", "Mobility", "ProblemSpec", "Variant",
    "assemble_linear", "assemble_pollinator", "build_mesh", "build_rectangle", "eval_expr",
    "parse_expr", "solve",
]
