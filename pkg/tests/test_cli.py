import json

import pytest
from click.testing import CliRunner
from pytest import approx

from app.src import cli as cli_module
from app.src.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, REGION_COLUMNS, cli, main, to_csv
from app.src.verify import EXACT_TOL, VerificationCase


@pytest.fixture()
def runner():
    return CliRunner(mix_stderr=False)


def write_config(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_catalog_lists_metrics(runner):
    result = runner.invoke(cli, ["catalog"])
    assert result.exit_code == EXIT_OK
    names = [m["name"] for m in json.loads(result.stdout)]
    assert "schwarzschild" in names and "ltb_vacuum" in names


def test_entropy_region_csv(runner, tmp_path):
    path = write_config(tmp_path, {
        "metric": "minkowski",
        "region": {"shape": "box", "lo": [0, 0, 0], "hi": [1, 1, 1]},
        "time": {"t0": 0.25, "t1": 0.75, "steps": 2},
    })
    result = runner.invoke(cli, ["entropy-region", "--config", path, "--format", "csv"])
    assert result.exit_code == EXIT_OK, result.stderr
    lines = result.stdout.strip().splitlines()
    assert lines[0] == ",".join(REGION_COLUMNS)
    assert len(lines) == 3
    row = dict(zip(REGION_COLUMNS, lines[1].split(",")))
    assert float(row["t"]) == 0.25
    assert float(row["S_U"]) == approx(6.0, abs=1e-10)



def test_static_metric_accepts_the_default_time_grid(runner, tmp_path):
    path = write_config(tmp_path, {
        "metric": "schwarzschild",
        "region": {"shape": "box", "lo": [4, 1.2, 0.0], "hi": [6, 1.9, 0.5], "order": 2},
    })
    result = runner.invoke(cli, ["entropy-region", "--config", path])
    assert result.exit_code == EXIT_OK, result.stderr
    rows = json.loads(result.stdout)
    assert rows[0]["t"] == 1.0 and rows[-1]["t"] == approx(2.0)
    assert len(rows) == 8
    for r in rows:
        assert r["S_U"] == approx(r["area"], rel=1e-6)


def test_time_grid_leaving_the_domain_is_a_config_error(runner, tmp_path):
    path = write_config(tmp_path, {
        "metric": "eds",
        "region": {"shape": "ball", "center": [0, 0, 0], "radius": 1.0, "order": 2},
        "time": {"t0": -1.0, "t1": 1.0, "steps": 3},
    })
    result = runner.invoke(cli, ["scan", "--config", path])
    assert result.exit_code == EXIT_CONFIG
    assert "time" in result.stderr

def test_csv_header_without_rows():
    assert to_csv([], REGION_COLUMNS) == ",".join(REGION_COLUMNS) + "\n"


def test_report_on_a_vacuum_point(runner, tmp_path):
    path = write_config(tmp_path, {"point": [1.2, 0.0, 0.0, 0.0]})
    result = runner.invoke(cli, ["report", "--metric", "kasner", "--config", path])
    assert result.exit_code == EXIT_OK, result.stderr
    rows = json.loads(result.stdout)
    assert rows[0]["branch"] == "vacuum"
    assert rows[0]["s"] == 1.0
    assert "PureElectric" in rows[0]["class"]


def test_report_writes_to_file(runner, tmp_path):
    out = tmp_path / "report.csv"
    result = runner.invoke(cli, ["report", "--metric", "eds", "--format", "csv", "--out", str(out), "--seed", "3"])
    assert result.exit_code == EXIT_OK, result.stderr
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0].startswith("point,class,N,H")
    assert len(lines) == 6


def test_scan_reports_monotone_entropy(runner, tmp_path):
    path = write_config(tmp_path, {
        "metric": "eds",
        "region": {"shape": "ball", "center": [0, 0, 0], "radius": 1.0, "order": 3},
        "time": {"t0": 1.0, "t1": 2.0, "steps": 3},
    })
    result = runner.invoke(cli, ["scan", "--config", path])
    assert result.exit_code == EXIT_OK, result.stderr
    payload = json.loads(result.stdout)
    assert payload["spfNondecreasing"] is True
    assert [r["class"] for r in payload["rows"]] == ["ConformallyFlat"] * 3
    assert payload["rows"][0]["dAreaVol"] == approx(-2.0, rel=1e-6)


@pytest.mark.parametrize("args", [
    ["report", "--metric", "godel"],
    ["entropy-region", "--metric", "minkowski"],
    ["verify", "--suite", "nope"],
])
def test_configuration_errors_exit_with_2(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == EXIT_CONFIG


def test_malformed_config_file(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"metric": ', encoding="utf-8")
    result = runner.invoke(cli, ["report", "--config", str(path)])
    assert result.exit_code == EXIT_CONFIG
    assert "linea 1" in result.stderr


def test_verify_suite_passes(runner):
    result = runner.invoke(cli, ["verify", "--suite", "s_crit"])
    assert result.exit_code == EXIT_OK, result.stderr
    cases = json.loads(result.stdout)
    assert cases[0]["case"] == "s_crit_table"
    assert cases[0]["pass"] is True


def test_verify_failure_exits_with_1(runner, monkeypatch):
    def failing(names, seed, config, threads):
        case = VerificationCase("broken", "-", 0.0)
        case.fail([0.0], "forzado")
        return [case]

    monkeypatch.setattr(cli_module, "run_suite", failing)
    result = runner.invoke(cli, ["verify", "--suite", "s_crit"])
    assert result.exit_code == EXIT_FAILED
    assert "broken" in result.stderr


def test_suite_run_applies_the_requested_tolerance(runner, monkeypatch):
    def loose(names, seed, config, threads):
        exact = VerificationCase("riemann_norm_split", "eds", EXACT_TOL)
        exact.record([1.0, 0.0, 0.0, 0.0], 5e-8)
        fd = VerificationCase("gauss", "eds", 1e-5)
        fd.record([1.0, 0.0, 0.0, 0.0], 2e-6)
        return [exact, fd]

    monkeypatch.setattr(cli_module, "run_suite", loose)
    assert runner.invoke(cli, ["verify", "--suite", "identities"]).exit_code == EXIT_FAILED
    result = runner.invoke(cli, ["verify", "--suite", "identities", "--tol", "1e-7"])
    assert result.exit_code == EXIT_OK, result.stderr
    cases = {c["case"]: c for c in json.loads(result.stdout)}
    assert cases["riemann_norm_split"]["tol"] == 1e-7
    assert cases["gauss"]["tol"] == 1e-5

def test_verify_on_a_metric_uses_cli_tolerance(runner, tmp_path):
    path = write_config(tmp_path, {"points": [[0.5, 0.1, 0.2, 0.3]]})
    result = runner.invoke(cli, ["verify", "--metric", "minkowski", "--config", path, "--tol", "1e-6"])
    assert result.exit_code == EXIT_OK, result.stderr
    cases = {c["case"]: c for c in json.loads(result.stdout)}
    assert cases["riemann_norm_split"]["tol"] == 1e-6
    assert cases["classification"]["pass"] is True


def test_main_returns_exit_codes(capsys):
    assert main(["catalog"]) == EXIT_OK
    assert main(["--no-such-flag"]) == EXIT_CONFIG
