import math

import numpy as np
import pytest
from pytest import approx, raises

from app.src.errors import ConfigError
from app.src.quadrature import RegionSpec, area_element, composite_rule

CUBE = RegionSpec(shape="box", lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0))
BALL = RegionSpec(shape="ball", center=(0.0, 0.0, 0.0), radius=1.5)


@pytest.mark.parametrize("panels", [1, 3])
def test_composite_gauss_is_exact_for_polynomials(panels):
    x, w = composite_rule(0.0, 2.0, 4, panels)
    assert np.sum(w * x ** 7) == approx(32.0, rel=1e-13)


def test_cube_volume_and_surface():
    assert sum(n.weight for n in CUBE.volume_rule()) == approx(1.0)
    eye = np.eye(3)
    assert sum(n.weight * area_element(eye, n.tangents) for n in CUBE.surface_rule(2)) == approx(6.0)


def test_ball_volume_and_sphere_area():
    assert sum(n.weight for n in BALL.volume_rule()) == approx(4.0 / 3.0 * math.pi * 1.5 ** 3, rel=1e-12)
    area = sum(n.weight * area_element(np.eye(3), n.tangents) for n in BALL.surface_rule())
    assert area == approx(4.0 * math.pi * 1.5 ** 2, rel=1e-12)


def test_nodes_stay_inside():
    assert all(BALL.contains(n.x) for n in BALL.volume_rule())
    assert all(CUBE.contains(n.x) for n in CUBE.surface_rule())
    assert not CUBE.contains([1.5, 0.5, 0.5])


def test_area_element_of_a_scaled_metric():
    tangents = np.stack([np.eye(3)[0], np.eye(3)[1]], axis=1)
    assert area_element(np.diag([4.0, 9.0, 1.0]), tangents) == approx(6.0)


def test_region_from_mapping():
    r = RegionSpec.from_mapping({"shape": "ball", "center": [1, 2, 3], "radius": 0.5, "maxError": 1e-6})
    assert r.center == (1.0, 2.0, 3.0)
    assert r.max_error == 1e-6


@pytest.mark.parametrize("data,key", [
    ({"shape": "torus"}, "region.shape"),
    ({"shape": "box", "lo": [0, 0, 0]}, "region.lo"),
    ({"shape": "box", "lo": [0, 0, 0], "hi": [1, 0, 1]}, "region.hi"),
    ({"shape": "ball", "center": [0, 0, 0], "radius": -1}, "region.radius"),
])
def test_invalid_regions(data, key):
    with raises(ConfigError) as exc:
        RegionSpec.from_mapping(data)
    assert exc.value.key == key
