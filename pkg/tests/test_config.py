import json

import pytest
from pytest import approx, raises

from app.src.config import RunConfig, TimeGrid, flatten, load_run_config, parse_run_config
from app.src.errors import ConfigError


def test_malformed_json_reports_position():
    with raises(ConfigError) as exc:
        parse_run_config('{"metric": "eds",\n "tol": }')
    assert exc.value.line == 2
    assert exc.value.column is not None


def test_unknown_key_is_named():
    with raises(ConfigError) as exc:
        parse_run_config(json.dumps({"metrik": "eds"}))
    assert exc.value.key == "metrik"


def test_nested_stencil_block():
    cfg = RunConfig.from_mapping({"fd": {"step": 1e-4, "order": 4}, "time": {"t0": 0.5, "t1": 1.5, "steps": 3}})
    assert cfg.stencil.step == 1e-4
    assert cfg.stencil.order == 4
    assert cfg.time.values() == approx([0.5, 1.0, 1.5])


def test_invalid_stencil_order():
    with raises(ConfigError) as exc:
        RunConfig.from_mapping({"fd": {"order": 3}})
    assert exc.value.key == "fd"


def test_opaque_blocks_are_not_flattened():
    flat = flatten({"region": {"shape": "ball"}, "time": {"t0": 1}})
    assert flat == {"region": {"shape": "ball"}, "time.t0": 1}
    cfg = RunConfig.from_mapping({"region": {"shape": "ball", "radius": 1}})
    assert cfg.region == {"shape": "ball", "radius": 1}


@pytest.mark.parametrize("data,key", [
    ({"format": "xml"}, "format"),
    ({"tol": -1}, "tol"),
    ({"points": [[1, 2, 3]]}, "points"),
    ({"fluid": 3}, "fluid"),
])
def test_invalid_values(data, key):
    with raises(ConfigError) as exc:
        RunConfig.from_mapping(data)
    assert exc.value.key == key


def test_point_and_points_are_merged():
    cfg = RunConfig.from_mapping({"point": [1, 0, 0, 0], "points": [[2, 0, 0, 0]]})
    assert cfg.points == [[1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0]]


def test_flags_override_file_values():
    cfg = RunConfig.from_mapping({"seed": 5, "tol": 1e-6})
    out = cfg.with_overrides(seed=7, tol=None, metric="kasner")
    assert (out.seed, out.tol, out.metric) == (7, 1e-6, "kasner")
    assert cfg.with_overrides(seed=None) is cfg


def test_time_grid():
    assert TimeGrid(1.0, 2.0, 1).values() == [1.0]
    with raises(ConfigError):
        TimeGrid(2.0, 1.0, 3)
    with raises(ConfigError):
        TimeGrid(1.0, 2.0, 0)


def test_load_run_config(tmp_path):
    assert load_run_config(None) == RunConfig()
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"metric": "ltb", "params": {"b": 0.25}}), encoding="utf-8")
    cfg = load_run_config(str(path))
    assert cfg.metric == "ltb"
    assert cfg.params == {"b": 0.25}
    with raises(ConfigError):
        load_run_config(str(tmp_path / "missing.json"))
