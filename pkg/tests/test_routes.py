import json


def test_health(client):
    res = client.get("/health")
    assert res.status_code == 200
    body = res.get_json()
    assert body["service"] == "weyl_lab"
    assert body["threads"] >= 1


def test_root(client):
    assert client.get("/").get_json()["name"] == "weyl_lab"


def test_catalog(client):
    res = client.get("/catalog")
    assert res.status_code == 200
    names = [m["name"] for m in res.get_json()["metrics"]]
    assert names[0] == "minkowski"
    assert "conformal" in names


def test_report_flrw_point(client):
    res = client.post("/report", json={"metric": "eds", "point": [1.0, 0.0, 0.0, 0.0]})
    assert res.status_code == 200
    body = res.get_json()
    assert body["metric"] == "eds"
    row = body["rows"][0]
    assert row["class"] == ["ConformallyFlat"]
    assert row["S"] == 0.0
    assert abs(row["M"] - 4.0 / 3.0) < 1e-12


def _parse_keeping_floats(text):
    tokens = []

    def keep(tok):
        tokens.append(tok)
        return float(tok)

    return json.loads(text, parse_float=keep), tokens


def test_report_keeps_seventeen_significant_digits(client):
    res = client.post("/report", json={"metric": "eds", "point": [1.5, 0.0, 0.0, 0.0]})
    assert res.status_code == 200
    body, tokens = _parse_keeping_floats(res.get_data(as_text=True))
    assert type(body["rows"][0]["S"]) is int
    assert tokens and all(tok == format(float(tok), ".17g") for tok in tokens)


def test_verify_body_uses_the_same_float_format(client):
    res = client.post("/verify", json={"suite": ["s_crit"]})
    body, tokens = _parse_keeping_floats(res.get_data(as_text=True))
    assert body["pass"] is True
    assert tokens and all(tok == format(float(tok), ".17g") for tok in tokens)


def test_report_rejects_bad_input(client):
    assert client.post("/report", json={"metric": "godel"}).status_code == 400
    res = client.post("/report", json={"metric": "eds", "points": [[1.0, 0.0, 0.0]]})
    assert res.status_code == 400
    assert "points" in res.get_json()["error"]


def test_report_rows_carry_point_errors(client):
    res = client.post("/report", json={"metric": "schwarzschild", "point": [0.5, 1.0, 1.0, 0.0]})
    assert res.status_code == 200
    assert "error" in res.get_json()["rows"][0]


def test_verify_suite(client):
    res = client.post("/verify", json={"suite": ["s_crit"]})
    assert res.status_code == 200
    body = res.get_json()
    assert body["pass"] is True
    assert body["cases"][0]["case"] == "s_crit_table"


def test_verify_metric_points(client):
    res = client.post("/verify", json={"metric": "minkowski", "points": [[0.5, 0.0, 0.0, 0.0]]})
    assert res.status_code == 200
    assert res.get_json()["pass"] is True
