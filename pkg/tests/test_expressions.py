import math

import pytest
from pytest import approx, raises

from app.src.errors import ConfigError, ExpressionError
from app.src.expressions import compile_expression


def test_evaluates_coordinates_and_functions():
    e = compile_expression("2*t^2 + sin(x1) - x3/4")
    assert e([1.5, 0.5, 0.0, 2.0]) == approx(2 * 2.25 + math.sin(0.5) - 0.5)
    assert e.depends_on("t") and e.depends_on("x1") and not e.depends_on("x2")


def test_precedence_and_associativity():
    assert compile_expression("-2^2")([0, 0, 0, 0]) == approx(-4.0)
    assert compile_expression("2^3^2")([0, 0, 0, 0]) == approx(512.0)
    assert compile_expression("(1 + 2)*3")([0, 0, 0, 0]) == approx(9.0)
    assert compile_expression("pow(t, 3)")([2, 0, 0, 0]) == approx(8.0)


def test_named_parameters():
    e = compile_expression("a*t + log(b)", {"a": 3.0, "b": math.e})
    assert e([2.0, 0, 0, 0]) == approx(7.0)
    assert e.variables == frozenset({"t"})


@pytest.mark.parametrize("src", ["", "2*", "foo(t)", "y + 1", "t $ 2", "sin(t, x1)", "(t"])
def test_invalid_expressions(src):
    with raises(ExpressionError):
        compile_expression(src)


def test_expression_errors_are_config_errors():
    with raises(ConfigError):
        compile_expression("sqrt(t)")([-1.0, 0, 0, 0])


def test_exact_derivatives_from_sympy():
    e = compile_expression("t^2*sin(x1) + c*x2*x3", {"c": 3.0})
    p = [2.0, 0.5, 1.0, -1.0]
    value, grad, hess = e.jet(p)
    assert value == approx(4.0 * math.sin(0.5) - 3.0)
    assert grad == approx([4.0 * math.sin(0.5), 4.0 * math.cos(0.5), -3.0, 3.0])
    assert hess[0, 0] == approx(2.0 * math.sin(0.5))
    assert hess[0, 1] == approx(hess[1, 0]) == approx(4.0 * math.cos(0.5))
    assert hess[2, 3] == approx(3.0)
    assert hess[3, 3] == 0.0


def test_constant_expression_has_zero_jet():
    value, grad, hess = compile_expression("2.5").jet([1.0, 0, 0, 0])
    assert value == 2.5
    assert not grad.any() and not hess.any()


@pytest.mark.parametrize("src", ["__import__('os')", "t.real", "(lambda: 1)()", "x1[0]", "sin + 1"])
def test_names_outside_the_whitelist_never_reach_the_parser(src):
    with raises(ExpressionError) as exc:
        compile_expression(src)
    assert exc.value.position is not None
