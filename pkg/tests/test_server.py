"""HTTP gateway: response shapes against the published JSON schemas,
error contract, and consistency with the in-process query engine."""
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient

from causynth import bundle as bundle_mod
from causynth import metrics
from causynth.server import create_app
from causynth.variables import TABULAR, Variable

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def _schema(name):
    return json.loads((SCHEMA_DIR / f"{name}.json").read_text())


def _check(payload, name):
    jsonschema.validate(payload, _schema(name))


@pytest.fixture(scope="module")
def server_bundle(full_bundle, labeled):
    sessions, y = labeled
    clf = metrics.train_classifier(sessions, y, epochs=300)
    import dataclasses
    return dataclasses.replace(full_bundle, classifier=clf)


@pytest.fixture(scope="module")
def client(server_bundle):
    return TestClient(create_app(server_bundle), raise_server_exceptions=False)


@pytest.fixture(scope="module")
def base_values(imaged_cohort):
    s = next(iter(imaged_cohort.subjects.values()))[0]
    return {v.value: float(s.values[v]) for v in TABULAR}


def test_health_and_graph_and_variables(client):
    h = client.get("/api/health")
    assert h.status_code == 200
    _check(h.json(), "health")
    g = client.get("/api/graph")
    assert g.status_code == 200
    _check(g.json(), "graph")
    v = client.get("/api/variables")
    assert v.status_code == 200
    _check(v.json(), "variables")
    assert {row["id"] for row in v.json()} == {v.value for v in TABULAR}


def test_predict_matches_schema_and_is_repeatable(client, base_values):
    body = {"state": {"values": base_values, "time": 0.0}, "dt": 1.0}
    r1 = client.post("/api/predict", json=body)
    r2 = client.post("/api/predict", json=body)
    assert r1.status_code == 200
    _check(r1.json(), "predict")
    _check(r1.json()["state"], "state")
    assert r1.json() == r2.json()


def test_predict_with_factual_clamp_is_noop(client, base_values):
    plain = client.post("/api/predict", json={
        "state": {"values": base_values, "time": 0.0}, "dt": 1.0}).json()
    clamped = client.post("/api/predict", json={
        "state": {"values": base_values, "time": 0.0}, "dt": 1.0,
        "interventions": [{"target": "x2",
                           "value": base_values["x2"]}]}).json()
    for k, v in plain["state"]["values"].items():
        assert clamped["state"]["values"][k] == pytest.approx(v, abs=1e-9)


def test_rollout_is_three_chained_predicts(client, base_values):
    roll = client.post("/api/rollout", json={
        "query": {"baseline": {"values": base_values, "time": 0.0},
                  "horizon": 3, "step_dt": 1.0},
        "with_images": False}).json()
    _check(roll, "rollout")
    assert len(roll["trajectory"]) == 4
    state = {"values": base_values, "time": 0.0}
    for k in range(3):
        nxt = client.post("/api/predict",
                          json={"state": state, "dt": 1.0}).json()["state"]
        got = roll["trajectory"][k + 1]["values"]
        for var, val in nxt["values"].items():
            assert got[var] == pytest.approx(val, abs=1e-9)
        state = nxt


def test_rollout_with_images_serves_pngs_and_diffs(client, base_values):
    roll = client.post("/api/rollout", json={
        "query": {"baseline": {"values": base_values, "time": 0.0},
                  "horizon": 2, "step_dt": 1.0},
        "with_images": True}).json()
    _check(roll, "rollout")
    ids = [s["image_id"] for s in roll["trajectory"]]
    assert all(ids)
    png = client.get(f"/api/image/{ids[0]}.png")
    assert png.status_code == 200
    assert png.headers["content-type"] == "image/png"
    assert png.content[:8] == b"\x89PNG\r\n\x1a\n"
    diff = client.get(f"/api/diff/{ids[0]}/{ids[-1]}.png")
    assert diff.status_code == 200
    assert diff.content[:8] == b"\x89PNG\r\n\x1a\n"


def test_counterfactual_endpoint(client, base_values):
    res = client.post("/api/counterfactual", json={
        "state": {"values": base_values, "time": 0.0},
        "intervention": {"target": "x5", "value": 400.0},
        "target": "x10", "dt": 1.0})
    assert res.status_code == 200
    payload = res.json()
    _check(payload, "counterfactual")
    assert payload["delta"] == pytest.approx(
        payload["counterfactual"] - payload["factual"], abs=1e-9)


def test_classify_endpoint(client, base_values):
    res = client.post("/api/classify", json={
        "state": {"values": base_values, "time": 0.0}})
    assert res.status_code == 200
    payload = res.json()
    _check(payload, "classify")
    assert sum(payload["probabilities"]) == pytest.approx(1.0, abs=1e-9)
    assert payload["classes"] == ["NC", "MCI", "AD"]
    again = client.post("/api/classify", json={
        "state": {"values": base_values, "time": 0.0}}).json()
    assert again == payload


def test_malformed_body_is_400(client):
    res = client.post("/api/predict", json={"state": {"values": "nope"},
                                            "dt": 1.0})
    assert res.status_code == 400
    payload = res.json()
    _check(payload, "error")
    assert payload["error"] == "schema_violation"


def test_domain_violation_is_422_with_variable(client, base_values):
    bad = dict(base_values, x2=7.0)       # sex is binary
    res = client.post("/api/predict", json={
        "state": {"values": bad, "time": 0.0}, "dt": 1.0})
    assert res.status_code == 422
    payload = res.json()
    _check(payload, "error")
    assert payload["variable"] == "x2"


def test_unknown_image_is_404(client, base_values):
    res = client.post("/api/predict", json={
        "state": {"values": base_values, "time": 0.0,
                  "image_id": "deadbeef"}, "dt": 1.0})
    assert res.status_code == 404
    _check(res.json(), "error")
    assert client.get("/api/image/deadbeef.png").status_code == 404


def test_missing_variable_is_422(client, base_values):
    partial = {k: v for k, v in base_values.items() if k != "x10"}
    res = client.post("/api/predict", json={
        "state": {"values": partial, "time": 0.0}, "dt": 1.0})
    assert res.status_code == 422
    _check(res.json(), "error")
