from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from conftest import FAST_LIMITS, fixture_model
from evalboard.fixtures import model_path, seed_data_dir
from evalboard.runner import RunLimits
from evalboard.server import create_app
from evalboard.store import Store


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    root = tmp_path_factory.mktemp("server-data")
    seed_data_dir(root)
    app = create_app(str(root), limits=FAST_LIMITS)
    with TestClient(app) as c:
        yield c


def test_list_tasks(client):
    tasks = client.get("/api/tasks").json()
    assert {t["task_id"] for t in tasks} == {"nli", "qa", "sentiment", "hate_speech"}


def test_get_task(client):
    doc = client.get("/api/tasks/nli").json()
    assert doc["perf_metric_id"] == "macro_f1"
    assert [m["metric_id"] for m in doc["metrics"]] == [
        "macro_f1", "throughput", "memory", "fairness", "robustness",
    ]


def test_unknown_task_404(client):
    resp = client.get("/api/tasks/nope")
    assert resp.status_code == 404
    assert resp.json()["code"] == "unknown_task"


def test_empty_store_lists_no_tasks(tmp_path):
    app = create_app(str(tmp_path / "empty"))
    with TestClient(app) as c:
        assert c.get("/api/tasks").json() == []


def test_leaderboard_default_weights(client):
    doc = client.get("/api/tasks/nli/leaderboard").json()
    assert [row["model_id"] for row in doc["rows"]][:2] == ["DeBERTa", "RoBERTa"]
    assert doc["rows"][0]["rank"] == 1


def test_every_score_response_reports_context(client):
    # weights, exchange rates and a timestamp must ride along on every response
    for resp in (
        client.get("/api/tasks/sentiment/leaderboard"),
        client.post("/api/tasks/sentiment/score", json={"metric_weights": {"macro_f1": 1}}),
    ):
        doc = resp.json()
        assert doc["weight_spec"]["metric_weights"]
        assert doc["weight_spec"]["dataset_weights"]
        assert doc["exchange_rates"]["metrics"]
        assert doc["timestamp"]
        assert doc["disclaimer"]


def test_leaderboard_no_records_409(tmp_path):
    root = tmp_path / "data"
    seeded = seed_data_dir(root)
    (seeded.root / "results" / "nli.jsonl").unlink()
    app = create_app(str(root))
    with TestClient(app) as c:
        resp = c.get("/api/tasks/nli/leaderboard")
        assert resp.status_code == 409
        assert resp.json()["code"] == "no_models"


def test_score_perf_only_sorts_by_performance(client):
    doc = client.post(
        "/api/tasks/nli/score", json={"metric_weights": {"macro_f1": 1}}
    ).json()
    rows = doc["rows"]
    perfs = [row["raw_values"]["macro_f1"] for row in rows]
    assert perfs == sorted(perfs, reverse=True)


def test_score_negative_weight_400(client):
    resp = client.post("/api/tasks/nli/score", json={"metric_weights": {"macro_f1": -1}})
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_weights"


def test_score_unknown_metric_400(client):
    resp = client.post("/api/tasks/nli/score", json={"metric_weights": {"nope": 1}})
    assert resp.status_code == 400
    assert resp.json()["code"] == "unknown_id"


def test_score_all_zero_weights_400(client):
    resp = client.post(
        "/api/tasks/nli/score",
        json={"metric_weights": {mid: 0 for mid in
                                 ("macro_f1", "throughput", "memory", "fairness", "robustness")}},
    )
    assert resp.status_code == 400


def test_score_is_pure_modulo_timestamp(client):
    body = {"metric_weights": {"macro_f1": 5, "throughput": 3}}
    a = client.post("/api/tasks/nli/score", json=body).json()
    b = client.post("/api/tasks/nli/score", json=body).json()
    for doc in (a, b):
        doc.pop("timestamp")
        doc["exchange_rates"].pop("computed_at")
    assert a == b


def test_score_as_of_before_any_records_409(client):
    resp = client.post(
        "/api/tasks/nli/score",
        json={"metric_weights": {"macro_f1": 1}, "as_of": "2000-01-01T00:00:00+00:00"},
    )
    assert resp.status_code == 409


def test_score_latency_p50_under_100ms(client):
    body = {"metric_weights": {"macro_f1": 4, "throughput": 2, "memory": 2,
                               "fairness": 1, "robustness": 1}}
    samples = []
    for _ in range(20):
        started = time.monotonic()
        assert client.post("/api/tasks/nli/score", json=body).status_code == 200
        samples.append(time.monotonic() - started)
    samples.sort()
    assert samples[len(samples) // 2] < 0.1


def test_submit_model_and_fetch(client):
    manifest = {
        "model_id": "test-echo",
        "name": "Echo",
        "owner": "tests",
        "task_id": "sentiment",
        "exec_ref": model_path("echo.py"),
        "model_card": {"intended_use": "testing"},
    }
    assert client.post("/api/models", json=manifest).status_code == 201
    doc = client.get("/api/models/test-echo").json()
    assert doc["model_card"]["intended_use"] == "testing"
    assert any(m["model_id"] == "test-echo" for m in client.get("/api/models").json())


def test_submit_invalid_manifest_400(client):
    resp = client.post("/api/models", json={"model_id": "x", "task_id": "sentiment",
                                            "exec_ref": ""})
    assert resp.status_code == 400


def test_predict_constant(client):
    resp = client.post(
        "/api/models/constant-positive/predict", json={"input": {"text": "any text"}}
    )
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["prediction"]["label"] == "positive"
    assert doc["latency_ms"] > 0


def test_predict_unknown_model_404(client):
    resp = client.post("/api/models/ghost/predict", json={"input": {"text": "x"}})
    assert resp.status_code == 404


def test_predict_timeout_504(tmp_path):
    root = tmp_path / "data"
    store = seed_data_dir(root)
    store.save_model(fixture_model("sleeper.py", "2000", model_id="snail",
                                   task_id="sentiment"))
    app = create_app(str(root), limits=RunLimits(per_example_timeout=0.2,
                                                 handshake_timeout=10.0))
    with TestClient(app) as c:
        resp = c.post("/api/models/snail/predict", json={"input": {"text": "x"}})
        assert resp.status_code == 504
        assert resp.json()["code"] == "timeout"


def test_predict_crashing_model_503(tmp_path):
    root = tmp_path / "data"
    store = seed_data_dir(root)
    store.save_model(fixture_model("crasher.py", model_id="boom", task_id="sentiment"))
    app = create_app(str(root), limits=FAST_LIMITS)
    with TestClient(app) as c:
        resp = c.post("/api/models/boom/predict", json={"input": {"text": "x"}})
        assert resp.status_code == 503
        assert resp.json()["code"] == "model_unavailable"


def test_job_lifecycle_and_atomic_commit(tmp_path):
    root = tmp_path / "data"
    seed_data_dir(root)
    app = create_app(str(root), limits=FAST_LIMITS)
    with TestClient(app) as c:
        job = c.post(
            "/api/jobs", json={"model_id": "constant-positive", "task_id": "sentiment"}
        ).json()
        assert job["status"] in ("queued", "running")
        status = _wait_for_job(c, job["job_id"])
        assert status["status"] == "done"
        assert status["record_count"] == 5  # one dataset x five metrics
        board = c.get("/api/tasks/sentiment/leaderboard").json()
        assert any(row["model_id"] == "constant-positive" for row in board["rows"])


def test_failed_job_commits_nothing(tmp_path):
    root = tmp_path / "data"
    store = seed_data_dir(root)
    store.save_model(fixture_model("crasher.py", model_id="boom", task_id="sentiment"))
    before = store.results_log("sentiment").line_count
    app = create_app(str(root), limits=FAST_LIMITS)
    with TestClient(app) as c:
        job = c.post("/api/jobs", json={"model_id": "boom", "task_id": "sentiment"}).json()
        status = _wait_for_job(c, job["job_id"])
        assert status["status"] == "failed"
        assert "ModelCrashed" in status["error"]
    assert store.results_log("sentiment").line_count == before


def test_jobs_never_run_concurrently(tmp_path):
    root = tmp_path / "data"
    seed_data_dir(root)
    app = create_app(str(root), limits=FAST_LIMITS)
    with TestClient(app) as c:
        ids = [
            c.post("/api/jobs", json={"model_id": "constant-positive",
                                      "task_id": "sentiment"}).json()["job_id"]
            for _ in range(2)
        ]
        deadline = time.monotonic() + 60
        while time.monotonic() < deadline:
            statuses = [c.get(f"/api/jobs/{jid}").json()["status"] for jid in ids]
            assert statuses.count("running") <= 1
            if all(s == "done" for s in statuses):
                break
            time.sleep(0.05)
        assert all(
            c.get(f"/api/jobs/{jid}").json()["status"] == "done" for jid in ids
        )


def test_unknown_job_404(client):
    assert client.get("/api/jobs/nope").status_code == 404


def _wait_for_job(client, job_id: str, timeout: float = 60.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        doc = client.get(f"/api/jobs/{job_id}").json()
        if doc["status"] in ("done", "failed"):
            return doc
        time.sleep(0.05)
    raise AssertionError(f"job {job_id} did not finish in {timeout}s: {doc}")
