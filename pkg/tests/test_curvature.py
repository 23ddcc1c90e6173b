import math

import numpy as np
from pytest import approx, mark

from app.src.catalog import build_metric
from app.src.curvature import (
    curvature_bundle,
    decomposition_residuals,
    kulkarni_nomizu,
    riemann,
    stress_divergence,
    stress_energy,
    weyl_bianchi_residual,
    weyl_trace_residual,
)
from app.src.tensor_core import GAMMA_BAR
from app.src.utils import max_abs

SCHW_POINT = np.array([0.5, 4.0, math.pi / 2, 1.0])
EDS_POINT = np.array([1.0, 0.3, -0.2, 0.5])


def test_schwarzschild_kretschmann_and_christoffel(schwarzschild):
    b = curvature_bundle(schwarzschild, SCHW_POINT)
    assert b.norm("riemann") == approx(0.01171875, rel=1e-10)
    assert b.christoffel[1, 0, 0] == approx(0.03125, rel=1e-12)
    assert max_abs(b.ricci) < 1e-12


def test_finite_difference_path_matches_exact_jet(schwarzschild, fd_only):
    b = curvature_bundle(schwarzschild, SCHW_POINT, fd_only)
    assert b.norm("riemann") == approx(0.01171875, rel=1e-6)


def test_eds_fluid_and_christoffel(eds):
    b = curvature_bundle(eds, EDS_POINT)
    fluid = stress_energy(b)
    assert fluid.kind == "perfect_fluid"
    assert fluid.M == approx(4.0 / 3.0, rel=1e-12)
    assert fluid.P == approx(0.0, abs=1e-12)
    assert fluid.k == approx(1.0, rel=1e-12)
    assert b.norm("a_tensor", GAMMA_BAR) == approx(80.0 / 27.0, rel=1e-10)
    assert b.christoffel[0, 1, 1] == approx(2.0 / 3.0, rel=1e-12)
    assert b.trace == approx(-b.scalar)


def test_de_sitter_is_a_cosmological_constant():
    fluid = stress_energy(curvature_bundle(build_metric("de_sitter"), [0.5, 0.0, 0.0, 0.0]))
    assert fluid.M == approx(3.0)
    assert fluid.P == approx(-3.0)
    assert fluid.k == approx(0.0, abs=1e-12)


def test_kasner_is_vacuum(kasner):
    fluid = stress_energy(curvature_bundle(kasner, [1.3, 0.0, 0.0, 0.0]))
    assert fluid.kind == "vacuum"
    assert fluid.k is None


@mark.parametrize("name", ["schwarzschild", "eds", "kasner", "ltb", "conformal"])
def test_weyl_is_traceless_and_decomposition_closes(name):
    spec = build_metric(name)
    for p in spec.sample_points(3, seed=5):
        b = curvature_bundle(spec, p)
        assert weyl_trace_residual(b) < 1e-8
        ricci_form, stress_form = decomposition_residuals(b)
        assert ricci_form < 1e-10
        assert stress_form < 1e-10


def test_riemann_tensor_symmetries(ltb, ltb_point):
    t = riemann(ltb, ltb_point)
    assert t.check_symmetry(1e-8) < 1e-8


def test_kulkarni_nomizu_of_the_metric():
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    gg = kulkarni_nomizu(g, g)
    # (g o g)_abcd = 2 (g_ac g_bd - g_ad g_bc)
    assert gg[1, 2, 1, 2] == 2.0
    assert gg[0, 1, 0, 1] == -2.0


def test_cotton_vanishes_in_vacuum(schwarzschild):
    b = curvature_bundle(schwarzschild, SCHW_POINT, with_cotton=True)
    assert max_abs(b.cotton) < 1e-8


def test_dust_stress_is_conserved(eds):
    assert max_abs(stress_divergence(eds, EDS_POINT)) < 1e-6


@mark.slow
def test_weyl_divergence_matches_cotton(ltb, ltb_point):
    assert weyl_bianchi_residual(ltb, ltb_point) < 1e-4
