from __future__ import annotations

import json
import subprocess
import sys
import time

import pytest

from conftest import DEMO_A, DEMO_B, FAST_LIMITS, constant_model, demo_task, fixture_model
from evalboard.errors import (
    EmptyDataset,
    MemoryLimitExceeded,
    ModelCrashed,
    ModelTimeout,
    ProcessGone,
    ProtocolViolation,
)
from evalboard.fixtures import model_path
from evalboard.metrics import GoldExample
from evalboard.runner import (
    ModelSession,
    RunLimits,
    evaluate_model_on_task,
    predict_one,
    run_evaluation,
    sample_memory,
    summarize_memory,
)

EXAMPLES = [GoldExample(f"u{i}", {"text": f"example number {i}"}, "positive") for i in range(5)]


def test_run_evaluation_collects_predictions_in_order():
    report = run_evaluation(fixture_model("echo.py"), "d", EXAMPLES, limits=FAST_LIMITS)
    assert [p.uid for p in report.predictions] == [e.uid for e in EXAMPLES]
    assert report.predictions[0].label == str(0)
    assert report.exit_status in (None, 0)


def test_run_evaluation_throughput_identity():
    report = run_evaluation(fixture_model("echo.py"), "d", EXAMPLES, limits=FAST_LIMITS)
    assert report.examples_per_second * report.wall_seconds == pytest.approx(
        len(EXAMPLES), abs=1e-9
    )
    assert report.sample_count >= 1
    assert report.memory_peak_gib >= report.memory_avg_gib > 0


def test_run_evaluation_deterministic_predictions():
    first = run_evaluation(fixture_model("echo.py"), "d", EXAMPLES, limits=FAST_LIMITS)
    second = run_evaluation(fixture_model("echo.py"), "d", EXAMPLES, limits=FAST_LIMITS)
    assert first.predictions == second.predictions


def test_run_evaluation_empty_dataset():
    with pytest.raises(EmptyDataset):
        run_evaluation(fixture_model("echo.py"), "d", [], limits=FAST_LIMITS)


def test_malformed_response_names_line():
    with pytest.raises(ProtocolViolation) as err:
        run_evaluation(fixture_model("malformed.py"), "d", EXAMPLES, limits=FAST_LIMITS)
    assert err.value.line_no == 2  # line 1 was the handshake


def test_crash_carries_exit_status():
    with pytest.raises(ModelCrashed) as err:
        run_evaluation(fixture_model("crasher.py"), "d", EXAMPLES, limits=FAST_LIMITS)
    assert err.value.exit_status == 3


def test_per_example_timeout():
    slow = fixture_model("sleeper.py", "500", model_id="slow-sleeper")
    limits = RunLimits(per_example_timeout=0.15, handshake_timeout=10.0, sample_interval=0.05)
    with pytest.raises(ModelTimeout):
        run_evaluation(slow, "d", EXAMPLES[:2], limits=limits)


def test_handshake_timeout():
    lazy = fixture_model("sleeper.py", "0 3000", model_id="lazy-handshake")
    limits = RunLimits(per_example_timeout=5.0, handshake_timeout=0.2, sample_interval=0.05)
    with pytest.raises(ModelTimeout):
        run_evaluation(lazy, "d", EXAMPLES[:1], limits=limits)


def test_memory_cap_enforced():
    heavy = fixture_model("ballast.py", "96", model_id="small-ballast")
    limits = RunLimits(per_example_timeout=10.0, handshake_timeout=15.0,
                       memory_cap_gib=0.02, sample_interval=0.05)
    with pytest.raises(MemoryLimitExceeded):
        run_evaluation(heavy, "d", EXAMPLES, limits=limits)


def test_sequential_dispatch_with_overlap_guard():
    guard = fixture_model("overlap_guard.py", "20", model_id="guard")
    report = run_evaluation(guard, "d", EXAMPLES, limits=FAST_LIMITS)
    assert len(report.predictions) == len(EXAMPLES)


def test_overlap_guard_detects_pipelining():
    # drive the guard by hand with two requests in flight: it must bail out
    proc = subprocess.Popen(
        [sys.executable, model_path("overlap_guard.py"), "100"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1,
    )
    try:
        assert json.loads(proc.stdout.readline())["status"] == "ready"
        proc.stdin.write(json.dumps({"uid": "u1", "text": "x"}) + "\n")
        proc.stdin.write(json.dumps({"uid": "u2", "text": "y"}) + "\n")
        proc.stdin.flush()
        assert proc.wait(timeout=10) == 7
    finally:
        if proc.poll() is None:
            proc.kill()


# --- memory summarization ----------------------------------------------------------

def test_summarize_memory_stats():
    avg, peak, count = summarize_memory([1.0, 1.2, 1.4])
    assert avg == pytest.approx(1.2)
    assert peak == 1.4
    assert count == 3


def test_summarize_memory_single_sample():
    assert summarize_memory([2.0]) == (2.0, 2.0, 1)


def test_summarize_memory_empty():
    with pytest.raises(ProcessGone):
        summarize_memory([])


def test_sample_memory_live_process():
    proc = subprocess.Popen([sys.executable, "-c", "import time; time.sleep(0.5)"])
    try:
        avg, peak, count = sample_memory(proc, interval=0.05, duration=0.3)
        assert count >= 2
        assert peak >= avg > 0
    finally:
        proc.kill()
        proc.wait()


def test_sample_memory_process_gone():
    proc = subprocess.Popen([sys.executable, "-c", "pass"])
    proc.wait()
    with pytest.raises(ProcessGone):
        sample_memory(proc, interval=0.05, duration=0.2)


# --- interactive predictions ---------------------------------------------------------

def test_predict_one_constant():
    prediction, latency_ms = predict_one(constant_model(), {"text": "anything"}, timeout=10.0)
    assert prediction.label == "positive"
    assert latency_ms > 0


def test_session_keeps_process_warm():
    session = ModelSession(constant_model(), FAST_LIMITS)
    try:
        session.predict({"text": "a"})
        pid_first = session._proc.pid
        session.predict({"text": "b"})
        assert session._proc.pid == pid_first
    finally:
        session.close()


def test_predict_crashed_model_raises():
    session = ModelSession(fixture_model("crasher.py"), FAST_LIMITS)
    try:
        with pytest.raises(ModelCrashed):
            session.predict({"text": "a"})
    finally:
        session.close()


def test_predict_queues_behind_measured_run():
    import threading

    sleeper = fixture_model("sleeper.py", "100", model_id="blocking-sleeper")
    examples = [GoldExample(f"u{i}", {"text": "x"}, "positive") for i in range(6)]
    run_started = threading.Event()

    def measured_run():
        run_started.set()
        run_evaluation(sleeper, "d", examples, limits=FAST_LIMITS)

    thread = threading.Thread(target=measured_run)
    thread.start()
    try:
        run_started.wait(5.0)
        time.sleep(0.15)  # let the run grab the job lock and get going
        started = time.monotonic()
        prediction, _ = predict_one(constant_model(), {"text": "hi"}, timeout=30.0)
        waited = time.monotonic() - started
        assert prediction.label == "positive"
        # the measured run holds the lock for ~0.6 s; the prediction queued
        assert waited > 0.2
    finally:
        thread.join()


# --- evaluate_model_on_task ----------------------------------------------------------

def _loader(ref):
    return {"demo-a": DEMO_A, "demo-b": DEMO_B}[ref.dataset_id]


def test_evaluate_produces_full_grid(lexicon):
    task = demo_task()
    records = evaluate_model_on_task(
        constant_model(), task, _loader, lexicon, seed=0, limits=FAST_LIMITS
    )
    assert len(records) == 10  # 2 datasets x 5 metrics
    cells = {(r.dataset_id, r.metric_id) for r in records}
    assert cells == {
        (d, m) for d in ("demo-a", "demo-b")
        for m in ("macro_f1", "throughput", "memory", "fairness", "robustness")
    }


def test_evaluate_constant_model_is_fully_stable(lexicon):
    task = demo_task()
    records = evaluate_model_on_task(
        constant_model(), task, _loader, lexicon, seed=0, limits=FAST_LIMITS
    )
    for rec in records:
        if rec.metric_id in ("fairness", "robustness"):
            assert rec.value == 100.0


def test_evaluate_crash_names_dataset(lexicon):
    task = demo_task()
    # answers enough for demo-a (3 examples + its perturbed copies),
    # crashes partway through demo-b (4 examples)
    flaky = fixture_model("crasher.py", "3", model_id="flaky")
    with pytest.raises(ModelCrashed, match="demo-b"):
        evaluate_model_on_task(flaky, task, _loader, lexicon, seed=0, limits=FAST_LIMITS)


def test_evaluate_requires_lexicon_when_task_has_fairness():
    task = demo_task()
    with pytest.raises(Exception, match="lexicon"):
        evaluate_model_on_task(
            constant_model(), task, _loader, None, seed=0, limits=FAST_LIMITS
        )
