import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gridcarve.errors import ExprDomainError, ExprSyntaxError, UnknownIdentifierError
from gridcarve.exprlang import as_expr, eval_expr, parse_expr


@pytest.mark.parametrize("src, x, y, t, want", [
    ("(x+y)^2", 0.4, 0.1, 0.0, 0.25),
    ("2^3^2", 0, 0, 0, 512.0),
    ("-2^2", 0, 0, 0, 4.0),
    ("sin(pi*x)*sin(2*pi*y)", 0.5, 0.25, 0, 1.0),
    ("1.5e-3*1e3", 0, 0, 0, 1.5),
    ("exp(t) - sqrt(abs(x))", -4.0, 0, 0.0, -1.0),
    ("cos(x) + cos(y)", 0.0, math.pi, 0, 0.0),
    ("x - y - t", 1, 2, 3, -4.0),
    ("x / y / 2", 8, 2, 0, 2.0),
])
def test_values(src, x, y, t, want):
    assert eval_expr(parse_expr(src), x, y, t) == pytest.approx(want, abs=1e-14)


def test_arrays_broadcast_constants():
    xs = np.linspace(0, 1, 5)
    out = eval_expr(parse_expr("4"), xs, xs)
    assert out.shape == (5,) and np.all(out == 4.0)
    out = eval_expr(parse_expr("x*y"), xs[:, None], xs[None, :])
    assert out.shape == (5, 5)


def test_unknown_identifier_reports_position():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expr("x + a")
    assert info.value.position == 4


@pytest.mark.parametrize("src", ["", "x +", "(x", "x)", "sin x", "2 3", "x ** 2", "foo(x)"])
def test_syntax_errors(src):
    with pytest.raises(ExprSyntaxError):
        parse_expr(src)


@pytest.mark.parametrize("src, x", [("1/x", 0.0), ("sqrt(x)", -1.0), ("exp(x)", 1e6)])
def test_domain_errors(src, x):
    with pytest.raises(ExprDomainError):
        eval_expr(parse_expr(src), x)


def test_as_expr_accepts_numbers_and_nodes():
    e = parse_expr("x+1")
    assert as_expr(e) is e
    assert as_expr(3)(0, 0) == 3.0
    assert as_expr("y")(0, 2) == 2.0


small = st.floats(-10, 10, allow_nan=False)


@given(small, small, small)
def test_matches_python_arithmetic(a, b, c):
    e = parse_expr("x*y + t - x/2")
    assert eval_expr(e, a, b, c) == pytest.approx(a * b + c - a / 2, rel=1e-12, abs=1e-12)


@given(small, small)
def test_printed_form_round_trips(a, b):
    for src in ("-(x+y)^2*sin(x)", "2^-x", "x-(y-2)", "exp(-x^2)/(1+y^2)"):
        e = parse_expr(src)
        again = parse_expr(str(e))
        assert again == e
        assert eval_expr(again, a, b) == eval_expr(e, a, b)
