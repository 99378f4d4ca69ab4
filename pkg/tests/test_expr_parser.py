from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from utils.errors import DomainError, ExprSyntaxError
from utils.expr_parser import (BinOp, Neg, Num, Pow, Var, evaluate, is_polynomial, parse_expr, print_expr,
                               to_sympy, variables)


# === Parsing ===

def test_evaluate_exact():
    ast = parse_expr("x*(y^2 - 1)/3")
    assert evaluate(ast, {"x": Fraction(2), "y": Fraction(3), "yu": Fraction(0)}) == Fraction(16, 3)


def test_precedence():
    assert parse_expr("1 + 2*x^3") == BinOp("+", Num(1), BinOp("*", Num(2), Pow(Var("x"), 3)))
    assert parse_expr("-x^2") == Pow(Neg(Var("x")), 2)


def test_literals():
    assert parse_expr("7") == Num(Fraction(7))
    assert isinstance(parse_expr("7").value, Fraction)
    assert parse_expr("2.5") == Num(2.5)
    assert parse_expr("1e-3") == Num(0.001)


@pytest.mark.parametrize("text", [
    "x*(y^2 - 1)/3",
    "-x^2 + yu",
    "2.5*yu - 3/x",
    "((y))",
    "-(x - -y)^3",
])
def test_print_reads_back(text):
    ast = parse_expr(text)
    assert parse_expr(print_expr(ast)) == ast


def random_ast(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        leaf = int(rng.integers(0, 3))
        if leaf == 0:
            return Var(("x", "y", "yu")[int(rng.integers(0, 3))])
        if leaf == 1:
            return Num(Fraction(int(rng.integers(0, 20))))
        return Num(int(rng.integers(0, 40)) / 4)
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return Neg(random_ast(rng, depth - 1))
    if kind == 1:
        return Pow(random_ast(rng, depth - 1), int(rng.integers(0, 5)))
    return BinOp("+-*/"[int(rng.integers(0, 4))], random_ast(rng, depth - 1), random_ast(rng, depth - 1))


def test_random_trees_read_back(rng):
    for _ in range(100):
        ast = random_ast(rng, 5)
        assert parse_expr(print_expr(ast)) == ast


@pytest.mark.parametrize("text,position,found", [
    ("x +", 3, None),
    ("x ** 2", 3, "*"),
    ("(x", 2, None),
    ("x $ y", 2, "$"),
])
def test_syntax_errors(text, position, found):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.position == position
    assert info.value.found == found
    assert info.value.exit_code == 1


def test_unknown_identifier():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("z + 1")
    assert info.value.expected == {"x", "y", "yu"}
    assert info.value.to_dict()["name"] == "SyntaxError"


def test_exponent_must_be_an_integer():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("y^x")
    assert info.value.expected == {"nonnegative integer"}
    with pytest.raises(ExprSyntaxError):
        parse_expr("y^1.5")


# === Analysis ===

def test_variables():
    assert variables(parse_expr("x*(y^2 - 1)/3")) == {"x", "y"}
    assert variables(parse_expr("-yu")) == {"yu"}
    assert variables(parse_expr("4")) == frozenset()


@pytest.mark.parametrize("text,expected", [
    ("x*y + yu^3", True),
    ("y/2", True),
    ("1/(1 + y)", False),
    ("-(x/yu)", False),
])
def test_is_polynomial(text, expected):
    assert is_polynomial(parse_expr(text)) is expected


def test_to_sympy():
    x, y = sp.symbols("x y")
    expr = to_sympy(parse_expr("x*(y^2 - 1)/3"))
    assert sp.expand(expr - sp.Rational(1, 3) * x * (y ** 2 - 1)) == 0
    assert to_sympy(parse_expr("1/3")) == sp.Rational(1, 3)


# === Evaluation ===

def test_evaluate_arrays():
    xs = np.linspace(0, 1, 5)
    values = evaluate(parse_expr("2.0*x - x^2"), {"x": xs})
    np.testing.assert_allclose(values, 2 * xs - xs ** 2)


def test_evaluate_guards():
    with pytest.raises(DomainError):
        evaluate(parse_expr("y/x"), {"x": 0, "y": 1})
    with pytest.raises(DomainError):
        evaluate(parse_expr("y + yu"), {"y": 1})
