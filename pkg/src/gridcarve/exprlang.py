"""Tiny expression language for boundary data, forcing terms and level sets.

Grammar (recursive descent)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?
    unary  := '-'? atom
    atom   := number | 'pi' | 'x' | 'y' | 't' | func '(' expr ')' | '(' expr ')'

Unary minus binds tighter than ``^``, so ``-2^2`` is ``(-2)^2 = 4``.
Evaluation works on floats and on numpy arrays alike.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprDomainError, ExprSyntaxError, UnknownIdentifierError

VARIABLES = ("x", "y", "t")
CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class Expr:
    """Immutable AST node."""

    __slots__ = ()

    def __call__(self, x=0.0, y=0.0, t=0.0):
        return eval_expr(self, x, y, t)


@dataclass(frozen=True, slots=True)
class Num(Expr):
    value: float

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True, slots=True)
class Const(Expr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    operand: Expr

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True, slots=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True, slots=True)
class Call(Expr):
    func: str
    arg: Expr

    def __str__(self):
        return f"{self.func}({self.arg})"


def _tokenize(source):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {source[start]!r}", source, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, pos = self.advance()
        if kind != "op" or text != op:
            found = text or "end of input"
            raise ExprSyntaxError(f"expected {op!r}, found {found!r}", self.source, pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", self.source, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        base = self.unary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.atom())
        return self.atom()

    def atom(self):
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in VARIABLES:
                return Var(text)
            if text in CONSTANTS:
                return Const(text)
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", self.source, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        found = text or "end of input"
        raise ExprSyntaxError(f"unexpected token {found!r}", self.source, pos)


def parse_expr(source: str) -> Expr:
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", source or "", 0)
    return _Parser(source).parse()


def _check(value, what):
    with np.errstate(all="ignore"):
        ok = np.all(np.isfinite(value))
    if not ok:
        raise ExprDomainError(f"non-finite result in {what}")
    return value


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        arg = _eval(node.arg, env)
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise ExprDomainError("sqrt of negative value")
        with np.errstate(all="ignore"):
            return _check(FUNCTIONS[node.func](arg), node.func)
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    op = node.op
    with np.errstate(all="ignore"):
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if np.any(np.asarray(right) == 0):
                raise ExprDomainError("division by zero")
            return _check(np.true_divide(left, right), "division")
        return _check(np.power(np.asarray(left, dtype=float), right), "power")


def eval_expr(e: Expr, x=0.0, y=0.0, t=0.0):
    """Evaluate ``e`` at ``(x, y, t)``; arrays broadcast.

    Raises ExprDomainError for any non-finite intermediate or result.
    """
    if not isinstance(e, Expr):
        e = as_expr(e)
    value = _eval(e, {"x": x, "y": y, "t": t})
    value = _check(value, "expression")
    shape = np.broadcast(x, y, t).shape
    if not shape:
        return float(value)
    return np.broadcast_to(value, shape).astype(float)


def as_expr(value) -> Expr:
    """Accept an Expr, a number or expression text."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Num(float(value))
    return parse_expr(str(value))
