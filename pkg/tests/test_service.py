"""HTTP facade: validation, run lifecycle, and report retrieval."""

import pytest
from fastapi.testclient import TestClient

from froglab.service import create_app

GOOD = """\
kind = symmetry
rank = 2
generators = [(1, 0), (-1, 0), (0, 1), (0, -1)]
master_seed = 31
param.horizon = 6
param.replicas = 2
tol.ratio_max = 2.0
"""

BAD = "kind = mystery\nrank = 2\n"


@pytest.fixture()
def client(tmp_path):
    with TestClient(create_app(default_output_dir=str(tmp_path))) as c:
        yield c


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["tool_version"]


def test_validate_good(client):
    body = client.post("/validate", json={"config_text": GOOD}).json()
    assert body["valid"] is True
    assert body["kind"] == "symmetry"
    assert len(body["config_hash"]) == 64
    assert body["problems"] == []


def test_validate_bad_lists_problems(client):
    body = client.post("/validate", json={"config_text": BAD}).json()
    assert body["valid"] is False
    assert body["config_hash"] is None
    messages = [p["message"] for p in body["problems"]]
    assert any("unknown kind" in m for m in messages)
    assert any("generators" in m for m in messages)
    locations = [p["location"] for p in body["problems"]]
    assert "line 1" in locations


def test_run_wait_then_report(client, tmp_path):
    status = client.post("/runs", json={"config_text": GOOD}).json()
    assert status["status"] == "complete"
    assert status["kind"] == "symmetry"
    run_dir = tmp_path / f"symmetry-{status['config_hash'][:12]}"
    assert run_dir.is_dir()
    assert status["run_dir"] == str(run_dir)

    again = client.get(f"/runs/{status['run_id']}").json()
    assert again == status

    rep = client.get(f"/runs/{status['run_id']}/report")
    assert rep.status_code == 200
    body = rep.json()
    assert body["passed"] is True
    assert [c["name"] for c in body["checks"]] == ["symmetry_ratio"]
    assert "result: PASS (1/1 checks)" in body["text"]


def test_run_nowait_completes(client):
    status = client.post("/runs",
                         json={"config_text": GOOD, "wait": False}).json()
    assert status["status"] in {"running", "complete"}
    for _ in range(200):
        status = client.get(f"/runs/{status['run_id']}").json()
        if status["status"] != "running":
            break
    assert status["status"] == "complete"


def test_run_rejects_invalid_config(client):
    resp = client.post("/runs", json={"config_text": BAD})
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert any("unknown kind" in p["message"] for p in detail)


def test_unknown_run_id_is_404(client):
    assert client.get("/runs/deadbeef").status_code == 404
    assert client.get("/runs/deadbeef/report").status_code == 404


def test_failed_run_report_conflicts(client):
    broken = ("kind = torsion_compare\nrank = 2\n"
              "generators = [(1, 0), (-1, 0), (0, 1), (0, -1)]\n"
              "master_seed = 9\nparam.horizon = 5\nparam.replicas = 1\n")
    status = client.post("/runs", json={"config_text": broken}).json()
    assert status["status"] == "failed"
    assert "torsion" in status["error"]
    resp = client.get(f"/runs/{status['run_id']}/report")
    assert resp.status_code == 409
    assert "failed" in resp.json()["detail"]


def test_output_dir_override(client, tmp_path):
    override = tmp_path / "elsewhere"
    status = client.post("/runs", json={"config_text": GOOD,
                                        "output_dir": str(override)}).json()
    assert status["status"] == "complete"
    assert status["run_dir"].startswith(str(override))
