import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest import approx, raises

from app.src.catalog import FluidParams, build_metric
from app.src.entropy import (
    INTERIOR,
    MAXIMAL,
    MINIMAL,
    a_sq_fluid,
    area_vol_monotonicity,
    eos_rate_bound,
    eos_rate_admissible,
    classify_extremal,
    densities,
    entropy_point,
    entropy_rate_margin,
    region_entropy,
    s_crit,
)
from app.src.errors import DomainError, InconsistencyError
from app.src.quadrature import RegionSpec

UNIT_CUBE = RegionSpec(shape="box", lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0))
UNIT_BALL = RegionSpec(shape="ball", center=(0.0, 0.0, 0.0), radius=1.0)
SCHW_BOX = RegionSpec(shape="box", lo=(4.0, 1.2, 1.0), hi=(6.0, 1.9, 2.0))

k_values = st.floats(min_value=0.0, max_value=4.0 / 3.0)
alphas = st.floats(min_value=0.0, max_value=1.0 / 3.0)


@pytest.mark.parametrize("k,expected", [
    (4.0 / 3.0, 11.0 * math.sqrt(2.0) / 12.0),
    (1.0, math.sqrt(2.0) / 4.0 + 2.0 / math.sqrt(5.0)),
    (0.0, math.sqrt(2.0) / 4.0),
])
def test_s_crit_table(k, expected):
    assert abs(s_crit(k, 0.0) - expected) < 1e-12
    assert s_crit(k, 1.0 / 3.0) == 0.0


@given(k_values, alphas)
def test_s_crit_is_non_negative_and_decreasing_in_alpha(k, alpha):
    assert s_crit(k, alpha) >= 0.0
    assert s_crit(k, alpha) <= s_crit(k, 0.0) + 1e-15


@given(st.floats(min_value=-10.0, max_value=10.0), k_values)
def test_fluid_a_norm_matches_energy_and_pressure(M, k):
    P = (k - 1.0) * M
    assert a_sq_fluid(M, k) == approx(5.0 / 3.0 * M * M + 3.0 * P * P + 2.0 * M * P, abs=1e-9 * (1 + M * M))


@given(st.floats(min_value=1e-3, max_value=10.0), st.floats(min_value=1e-3, max_value=10.0))
def test_densities_relation(w_sq, a_sq):
    d = densities(w_sq, a_sq, w_sq + a_sq)
    assert d.branch == "generic"
    assert 0.0 <= d.s <= 1.0
    assert d.s ** 2 * (d.s_bar ** 2 + 1.0) == approx(d.s_bar ** 2, rel=1e-12)


def test_density_branches():
    assert densities(0.0, 0.0, 0.0).branch == "flat"
    assert densities(0.0, 0.0, 0.0).s == 1.0
    vac = densities(2.0, 0.0, 2.0)
    assert (vac.s, vac.s_bar, vac.branch) == (1.0, math.inf, "vacuum")
    cf = densities(0.0, 3.0, 3.0)
    assert (cf.s, cf.s_bar, cf.branch) == (0.0, 0.0, "conformally_flat")
    with raises(InconsistencyError):
        densities(1.0, 0.0, 0.0)


def test_vacuum_point_has_unit_density(kasner):
    e = entropy_point(kasner, [1.4, 0.0, 0.0, 0.0])
    assert e.branch == "vacuum"
    assert e.s == 1.0
    assert e.S == approx(1.4, rel=1e-12)
    assert e.s_crit is None
    assert e.Spf == e.S


def test_eds_point_is_minimal(eds):
    e = entropy_point(eds, [1.0, 0.5, 0.0, 0.0])
    assert e.branch == "conformally_flat"
    assert e.s == 0.0
    assert e.k == approx(1.0)
    assert e.alpha_max == approx(1.0 / 3.0)
    assert e.s_crit == 0.0
    assert e.Spf == 0.0


def test_explicit_fluid_parameters(ltb, ltb_point):
    e = entropy_point(ltb, ltb_point, fluid=FluidParams(k=1.0, alpha=0.0))
    assert e.s_crit == approx(s_crit(1.0, 0.0))
    assert e.Spf == approx((e.s + e.s_crit) * e.sqrtg)
    assert 0.0 < e.s < 1.0
    assert e.with_alpha(1.0 / 3.0).Spf == approx(e.S)


def test_minkowski_cube_entropy():
    r = region_entropy(build_metric("minkowski"), UNIT_CUBE, 0.5)
    assert abs(r.S_U - 6.0) < 1e-10
    assert abs(r.area - 6.0) < 1e-10
    assert r.quad_error < 1e-10
    assert r.flags == []


def test_flrw_ball_entropy_vanishes(eds):
    r = region_entropy(eds, UNIT_BALL, 1.0)
    assert r.S_U == approx(0.0, abs=1e-12)
    assert r.Spf_U == approx(0.0, abs=1e-12)
    assert r.alpha == approx(1.0 / 3.0)
    assert r.area == approx(4.0 * math.pi, rel=1e-12)


def test_schwarzschild_box_saturates_the_area(schwarzschild):
    r = region_entropy(schwarzschild, SCHW_BOX, 0.5)
    assert r.S_U == approx(r.area, rel=1e-6)
    assert r.Spf_U <= r.bound + r.quad_error
    assert r.flags == []


def test_region_outside_the_domain(schwarzschild):
    inside_horizon = RegionSpec(shape="box", lo=(1.0, 1.2, 1.0), hi=(3.0, 1.9, 2.0))
    with raises(DomainError):
        region_entropy(schwarzschild, inside_horizon, 0.5)


def test_area_over_volume_shrinks_in_flrw(eds):
    # Area/Vol = 3 / (r0 a(t)) con a = t^(2/3)
    assert area_vol_monotonicity(eds, UNIT_BALL, 1.0) == approx(-2.0, rel=1e-6)


def test_extremal_classification(schwarzschild, eds, ltb):
    assert classify_extremal(schwarzschild, SCHW_BOX, 0.5).kind == MAXIMAL
    assert classify_extremal(eds, UNIT_BALL, 1.0).kind == MINIMAL
    ltb_box = RegionSpec(shape="box", lo=(0.6, 1.2, 2.0), hi=(1.4, 1.9, 3.0), order=3)
    assert classify_extremal(ltb, ltb_box, 1.0).kind == INTERIOR


def test_eos_rate_bound_branches():
    assert eos_rate_bound(4.0 / 3.0, 0.1, 0.0) == (math.inf, "radiation")
    base, branch = eos_rate_bound(1.0, 1.0 / 3.0, 0.0)
    assert branch == "one" and base == approx(5.0 / 3.0)
    assert eos_rate_bound(1.0, 0.0, 0.0) == (0.0, "alpha_prime")
    assert eos_rate_bound(1.0, 0.0, 1.0)[1] == "one"
    assert eos_rate_admissible(1.0, 1.0 / 3.0, 1.0, 0.0)
    assert not eos_rate_admissible(1.0, 0.0, 0.1, 0.0)


@given(k_values, alphas, st.floats(min_value=0.0, max_value=2.0), st.floats(min_value=0.0, max_value=1.0))
def test_entropy_rate_margin_non_negative_under_parameter_conditions(k, alpha, alpha_prime, fraction):
    bound, _ = eos_rate_bound(k, alpha, alpha_prime)
    k_prime = fraction * (bound if math.isfinite(bound) else 1.0)
    assert entropy_rate_margin(k, k_prime) >= -1e-9
    assert entropy_rate_margin(1.0, 0.0) == 5.0
