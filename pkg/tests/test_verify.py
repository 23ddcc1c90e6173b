import math

import numpy as np
import pytest
from pytest import approx, mark, raises

from app.src.catalog import build_metric, conformal
from app.src.errors import ConfigError
from app.src.verify import (
    ALGEBRAIC,
    DERIVATIVE,
    FLRW_BALL,
    FOLIATION,
    LTB_BOX,
    SCHWARZSCHILD_BOX,
    check_identities,
    check_classification,
    check_conformal_class,
    check_entropy_evolution_electric,
    check_monotonicity_electric,
    check_reference_values,
    check_weyl_evolution_electric,
    check_weyl_evolution_magnetic,
    evolution_residual,
    magnetic_entropy_forms,
    magnetic_weyl_rate_loops,
    magnetic_weyl_rate,
    run_suite,
    s_crit_table,
    synthetic_magnetic_samples,
)

SEED = 20240601


def _failed(cases):
    return [(c.name, c.metric, c.max_residual) for c in cases if not c.passed]


def test_evolution_residual_has_a_floor():
    assert evolution_residual(1e-6, 0.0) == approx(1e-3)
    assert evolution_residual(2.0, 1.0) == approx(0.5)


def test_magnetic_weyl_rate_on_synthetic_data():
    case = check_weyl_evolution_magnetic(seed=SEED, n=100)
    assert case.passed, case.witnesses[:3]
    assert case.points == 100
    assert case.max_residual <= 1e-12
    assert case.details["signFailures"] == 0


def test_magnetic_contraction_matches_loops():
    smp = synthetic_magnetic_samples(1, seed=3)[0]
    g_inv = np.linalg.inv(smp.g)
    fast = magnetic_weyl_rate(smp.h, smp.w_tijk, g_inv)
    slow = magnetic_weyl_rate_loops(smp.h, smp.w_tijk, g_inv)
    assert fast == approx(slow, rel=1e-12)
    assert fast >= 0.0


def test_closed_and_chain_rule_forms_differ_in_the_hww_sign():
    for smp in synthetic_magnetic_samples(10, seed=4):
        closed, chain = magnetic_entropy_forms(smp)
        g_inv = np.linalg.inv(smp.g)
        hww = magnetic_weyl_rate(smp.h, smp.w_tijk, g_inv) / -16.0
        w_sq = 4.0 * float(np.einsum("abc,ai,bj,ck,ijk->", smp.w_tijk, g_inv, g_inv, g_inv, smp.w_tijk))
        M, k = smp.M, smp.k
        a_sq = (9 * k * k - 12 * k + 8) * M * M / 3.0
        r_bar = math.sqrt(w_sq + a_sq)
        gap = -32.0 * hww * a_sq / (math.sqrt(w_sq) * r_bar ** 3) * smp.sqrtg
        assert closed - chain == approx(gap, rel=1e-8, abs=1e-12)
        assert closed >= 0.0


def test_magnetic_weyl_rate_is_skipped_without_magnetic_points(kasner):
    case = check_weyl_evolution_magnetic(spec=kasner, points=kasner.sample_points(2, SEED))
    assert case.skipped == "not exercised on a metric"


def test_weyl_evolution_on_kasner(kasner):
    for p in kasner.sample_points(5, SEED):
        rep = check_weyl_evolution_electric(kasner, p)
        assert rep.residual < 1e-4, (p, rep.lhs, rep.rhs)


def test_vacuum_entropy_grows_with_the_volume(kasner):
    for p in kasner.sample_points(5, SEED):
        rep = check_entropy_evolution_electric(kasner, p)
        assert rep.extra["branch"] == "A=0"
        assert rep.residual < 1e-8
        assert rep.rhs == approx(1.0)


def test_electric_formulas_on_ltb(ltb, ltb_point):
    weyl = check_weyl_evolution_electric(ltb, ltb_point)
    assert weyl.residual < 1e-4, (weyl.lhs, weyl.rhs)
    entropy = check_entropy_evolution_electric(ltb, ltb_point)
    assert entropy.extra["branch"] == "generic"
    assert entropy.residual < 1e-4, (entropy.lhs, entropy.rhs)


def test_entropy_evolution_skipped_when_weyl_vanishes(eds):
    rep = check_entropy_evolution_electric(eds, [1.0, 0.0, 0.0, 0.0])
    assert rep.skipped is not None
    assert rep.passed


@pytest.mark.parametrize("name", ["kasner", "schwarzschild", "ltb", "eds"])
def test_pointwise_identities(name):
    spec = build_metric(name)
    cases = check_identities(spec, spec.sample_points(3, SEED), names=ALGEBRAIC + FOLIATION,
                                      derivatives=False, threads=1)
    assert cases
    assert _failed(cases) == []


def test_derivative_identities_on_dust(eds):
    cases = check_identities(eds, eds.sample_points(2, SEED), names=DERIVATIVE, threads=1)
    names = {c.name for c in cases}
    assert {"conservation_energy", "a_sq_fluid", "a_sq_evolution", "cotton_fluid"} <= names
    assert _failed(cases) == []


@pytest.mark.parametrize("name", ["schwarzschild", "eds", "de_sitter", "kasner", "ltb", "ltb_vacuum"])
def test_reference_values(name):
    spec = build_metric(name)
    case = check_reference_values(spec, spec.sample_points(3, SEED))
    assert case.passed, case.witnesses[:3]


def test_classification_case(ltb):
    assert check_classification(ltb, ltb.sample_points(5, SEED)).passed


def test_s_crit_table_case():
    case = s_crit_table()
    assert case.passed
    assert case.points == 6


@pytest.mark.parametrize("sigma", ["(2/3)*log(t)", "t", "t + 0.1*sin(x1)"])
def test_conformal_class(sigma):
    spec = conformal(sigma)
    case = check_conformal_class(spec, spec.sample_points(3, SEED))
    assert case.passed, case.witnesses[:3]
    assert case.details["sigmaNondecreasing"]


def test_monotonicity_on_flrw_and_static_regions(eds, schwarzschild):
    flrw = check_monotonicity_electric(eds, FLRW_BALL, [1.0, 1.5], threads=1)
    assert flrw.passed
    assert flrw.alpha == approx(1.0 / 3.0)
    assert flrw.equality_consistent
    assert flrw.hypotheses_failed == 0
    static = check_monotonicity_electric(schwarzschild, SCHWARZSCHILD_BOX, [0.5], threads=1)
    assert static.passed
    assert static.equality_points == static.hypotheses_ok


@mark.slow
def test_monotonicity_on_ltb(ltb):
    rep = check_monotonicity_electric(ltb, LTB_BOX, [1.0, 1.25], threads=1)
    assert rep.passed, rep.witnesses[:3]
    assert rep.min_rate >= -1e-5


def test_run_suite_selects_groups():
    cases = run_suite(["s_crit", "magnetic"], seed=SEED, threads=1)
    assert [c.name for c in cases] == ["s_crit_table", "weyl_evolution_magnetic"]
    assert all(c.passed for c in cases)
    with raises(ConfigError):
        run_suite(["nope"])


def test_case_serialization():
    d = s_crit_table().to_dict()
    assert d["case"] == "s_crit_table"
    assert d["pass"] is True
    assert set(d) == {"case", "metric", "params", "points", "maxResidual", "tol", "pass", "skipped",
                      "witnesses", "details"}
