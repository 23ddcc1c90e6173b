from types import SimpleNamespace

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx, raises

from app.src.curvature import kulkarni_nomizu
from app.src.errors import DegenerateMetricError, SymmetryError
from app.src.tensor_core import (
    GAMMA,
    GAMMA_BAR,
    MetricPair,
    Tensor4,
    block_norms,
    levi_civita,
    norm_sq,
    riemann_symmetry_residual,
    spatial_frame,
)

coef = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
positive = st.floats(min_value=0.3, max_value=3.0)


def test_gamma_bar_flips_the_lapse_block():
    pair = MetricPair.from_adm(2.0, np.eye(3))
    assert pair.gamma_bar[0, 0] == approx(4.0)
    assert pair.gamma[0, 0] == approx(-4.0)
    assert pair.identity_residual() < 1e-14


def test_spacelike_time_direction_is_rejected():
    with raises(DegenerateMetricError):
        MetricPair.from_gamma(np.diag([1.0, 1.0, 1.0, 1.0]))


def test_unit_normal_norms():
    pair = MetricPair.from_adm(2.0, np.diag([1.0, 4.0, 9.0]))
    normal = Tensor4.lower([-2.0, 0.0, 0.0, 0.0])
    assert norm_sq(normal, pair, GAMMA) == approx(-1.0)
    assert norm_sq(normal, pair, GAMMA_BAR) == approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(coef, min_size=20, max_size=20), positive, st.lists(positive, min_size=3, max_size=3))
def test_block_splitting_of_algebraic_curvature_tensors(c, lapse, diag):
    a = np.array(c[:16]).reshape(4, 4)
    a = a + a.T
    b = np.diag(c[16:20])
    t = Tensor4.lower(kulkarni_nomizu(a, b))
    g = np.diag(diag)
    pair = MetricPair.from_adm(lapse, g)
    frame = SimpleNamespace(N=lapse, g_inv=np.linalg.inv(g))
    m, e, s = block_norms(t, frame)
    scale = max(1.0, abs(m) + abs(e) + abs(s))
    assert norm_sq(t, pair, GAMMA) == approx(-4 * m + 4 * e + s, abs=1e-9 * scale)
    assert norm_sq(t, pair, GAMMA_BAR) == approx(4 * m + 4 * e + s, abs=1e-9 * scale)


def test_block_norms_reject_non_curvature_tensors():
    rng = np.random.default_rng(3)
    frame = SimpleNamespace(N=1.0, g_inv=np.eye(3))
    with raises(SymmetryError):
        block_norms(Tensor4.lower(rng.normal(size=(4, 4, 4, 4))), frame)


def test_kulkarni_nomizu_has_riemann_symmetries():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(4, 4))
    a = a + a.T
    assert riemann_symmetry_residual(kulkarni_nomizu(a, np.eye(4))) < 1e-14


def test_levi_civita_signs():
    eps = levi_civita(3)
    assert eps[0, 1, 2] == 1.0
    assert eps[1, 0, 2] == -1.0
    assert eps[0, 0, 2] == 0.0


def test_spatial_frame_is_orthonormal():
    g = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 3.0]])
    e = spatial_frame(g)
    assert np.allclose(e.T @ g @ e, np.eye(3), atol=1e-13)
