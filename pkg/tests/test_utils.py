import json
import math

from pytest import approx

from app.src.utils import dumps17, fmt_float, ordered_map, pairwise_sum, residual, seeded_points


def test_pairwise_sum():
    assert pairwise_sum([]) == 0.0
    assert pairwise_sum(range(10)) == 45.0
    assert pairwise_sum([0.1] * 10) == approx(1.0)


def test_fmt_float_uses_17_significant_digits():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(None) == ""
    assert fmt_float(True) == "true"
    assert fmt_float(3) == "3"
    assert fmt_float(math.inf) == "inf"


def test_dumps17_writes_null_for_non_finite():
    text = dumps17({"a": float("nan"), "b": [1.0, 2], "c": {"d": math.inf}})
    assert json.loads(text) == {"a": None, "b": [1.0, 2], "c": {"d": None}}


def test_ordered_map_keeps_order():
    assert ordered_map(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]


def test_residual_switches_to_absolute_below_one():
    assert residual(1e-12, 0.0) == approx(1e-12)
    assert residual(200.0, 100.0) == approx(1.0)


def test_seeded_points_are_reproducible():
    box = [(0.0, 1.0)] * 4
    a = seeded_points(box, 3, 9)
    b = seeded_points(box, 3, 9)
    assert all((x == y).all() for x, y in zip(a, b))
    assert all(((0.0 <= x) & (x <= 1.0)).all() for x in a)
