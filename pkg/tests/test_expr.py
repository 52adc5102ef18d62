import math

import numpy as np
import pytest

from src.rough_forms.errors import (
    ArityError,
    DimensionError,
    DomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)
from src.rough_forms.expr import (
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    eval_batch,
    eval_expr,
    format_expr,
    free_variables,
    parse_expr,
    tokenize,
)


def test_tokens_carry_positions():
    toks = tokenize("x1 + 2.5e-1")
    assert [(t.kind, t.text, t.pos) for t in toks] == [
        ("name", "x1", 0), ("op", "+", 3), ("num", "2.5e-1", 5), ("eof", "", 11)]


def test_power_binds_tighter_than_unary_minus():
    assert parse_expr("-x^2") == Neg(BinOp("^", Var(0), Num(2.0, "2")))
    assert eval_expr(parse_expr("-x^2"), 3.0) == -9.0


@pytest.mark.parametrize("text, value", [
    ("2^-1", 0.5),
    ("2^3^2", 512.0),
    ("1 - 2 - 3", -4.0),
    ("8 / 2 / 2", 2.0),
    ("2 * (3 + 4)", 14.0),
    ("-2^2", -4.0),
    ("pi", math.pi),
    ("max(1, min(5, 3))", 3.0),
    ("pow(2, 10)", 1024.0),
    ("sqrt(16) + abs(-1)", 5.0),
])
def test_evaluation(text, value):
    assert eval_expr(parse_expr(text), 0.0) == pytest.approx(value)


def test_variables_and_aliases():
    e = parse_expr("x + 10*y + 100*z + 1000*x4")
    assert free_variables(e) == {0, 1, 2, 3}
    assert eval_expr(e, [1.0, 2.0, 3.0, 4.0]) == 4321.0


def test_vectorized_evaluation():
    e = parse_expr("x*y")
    np.testing.assert_array_equal(eval_batch(e, np.array([[1.0, 2.0], [3.0, 4.0]])), [2.0, 12.0])
    np.testing.assert_array_equal(eval_batch(parse_expr("3"), np.zeros((4, 1))), [3.0] * 4)


def test_weierstrass_builtin():
    e = parse_expr("weierstrass(0.5, 3, 1, x)")
    assert isinstance(e, Call)
    assert eval_expr(e, 0.25) == pytest.approx(math.cos(math.pi * 0.25))
    with pytest.raises(DomainError):
        eval_batch(parse_expr("weierstrass(x, 3, 2, x)"), np.array([[0.1], [0.2]]))


@pytest.mark.parametrize("text", [
    "x^2 - 3*x + 1", "-(x + y)^2", "sin(x)*cos(y)", "x/(y*z)", "(x - y) - z", "x - (y - z)",
    "2^-x", "(2^3)^2", "-x^-2", "weierstrass(0.5, 3, 10, x + y)",
])
def test_format_parses_back_to_the_same_tree(text):
    e = parse_expr(text)
    assert parse_expr(format_expr(e)) == e


def test_syntax_errors_report_positions():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expr("x +")
    assert info.value.position == 3
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expr("(x + 1")
    assert info.value.position == 6
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expr("x y")
    assert info.value.position == 2
    assert info.value.found == "y"


def test_unknown_names():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expr("1 + foo")
    assert info.value.name == "foo"
    assert info.value.position == 4
    with pytest.raises(UnknownIdentifierError):
        parse_expr("x9")
    with pytest.raises(UnknownIdentifierError):
        parse_expr("gamma(x)")


def test_arity_is_checked():
    with pytest.raises(ArityError):
        parse_expr("sin(1, 2)")
    with pytest.raises(ArityError):
        parse_expr("weierstrass(0.5, 3, x)")


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_expr(parse_expr("log(x)"), 0.0)
    with pytest.raises(DomainError):
        eval_expr(parse_expr("sqrt(x)"), -1.0)


def test_dimension_is_checked():
    with pytest.raises(DimensionError):
        eval_expr(parse_expr("x + y"), 1.0)
