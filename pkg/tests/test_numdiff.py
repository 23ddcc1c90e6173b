import math

import numpy as np
import pytest
from pytest import approx, raises

from app.src.errors import StencilError
from app.src.numdiff import FieldFn, StencilConfig, jet, partial, richardson, self_check


def wave(p):
    return math.sin(p[1]) * p[0] ** 2 + p[2] * p[3]


def test_first_derivative_matches_closed_form():
    p = np.array([1.5, 0.3, 0.2, -0.4])
    assert partial(wave, p, (1,)) == approx(math.cos(0.3) * 1.5 ** 2, abs=1e-10)
    assert partial(wave, p, (0,)) == approx(2 * 1.5 * math.sin(0.3), abs=1e-10)


def test_mixed_partials_evaluate_the_same_sum():
    p = np.array([1.5, 0.3, 0.2, -0.4])
    assert partial(wave, p, (0, 1)) == partial(wave, p, (1, 0))
    assert partial(wave, p, (0, 1)) == approx(2 * 1.5 * math.cos(0.3), abs=1e-8)
    assert partial(wave, p, (2, 3)) == approx(1.0, abs=1e-9)


@pytest.mark.parametrize("order", [2, 4])
def test_third_derivative(order):
    cfg = StencilConfig(step=1e-2, order=order)
    p = np.array([0.7, 0.0, 0.0, 0.0])
    # d^3/dt^3 t^2 sin(x1) = 0, d^3/dx1^3 = -cos(x1) t^2
    assert partial(wave, p, (1, 1, 1), cfg) == approx(-math.cos(0.0) * 0.49, abs=1e-6)


def test_richardson_removes_leading_error():
    h = 0.1
    values = [1.0 + h ** 2, 1.0 + (h / 2) ** 2]
    assert richardson(values, 2) == approx(1.0, abs=1e-14)


def test_stencil_outside_domain_raises():
    p = np.array([1e-4, 0.0, 0.0, 0.0])
    with raises(StencilError):
        partial(wave, p, (0,), domain=lambda q: q[0] > 0)


def test_non_finite_evaluation_raises():
    with raises(StencilError):
        partial(lambda q: math.inf, np.zeros(4), (1,))


def test_invalid_stencil_config():
    with raises(ValueError):
        StencilConfig(order=3)
    with raises(ValueError):
        StencilConfig(step=0.0)


def test_jet_of_tensor_field():
    def field(p):
        return np.array([[p[0] ** 2, p[1] * p[2]], [p[1] * p[2], 1.0]])

    value, first, second = jet(field, np.array([2.0, 1.0, 3.0, 0.0]))
    assert value[0, 0] == approx(4.0)
    assert first[0, 0, 0] == approx(4.0, abs=1e-9)
    assert first[1, 0, 1] == approx(3.0, abs=1e-9)
    assert second[1, 2, 0, 1] == approx(1.0, abs=1e-8)
    assert second[2, 1, 0, 1] == second[1, 2, 0, 1]


def test_self_check_against_exact_gradient():
    f = FieldFn(wave, exact_gradient=lambda p: [2 * p[0] * math.sin(p[1]), p[0] ** 2 * math.cos(p[1]), p[3], p[2]])
    pts = [[1.0, 0.1, 0.2, 0.3], [0.5, -1.0, 2.0, 1.0]]
    assert self_check(f, pts) < 1e-9
