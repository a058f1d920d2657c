"""Evaluation execution: spawn a submitted model program, stream examples
one at a time over a newline-delimited JSON protocol, collect predictions,
and measure throughput and memory along the way.

Wire protocol (UTF-8, one JSON object per line, flushed after every line):

* handshake: the model prints ``{"status": "ready"}`` within 60 s of spawn
* request:   ``{"uid": "...", ...input fields}`` on the model's stdin
* response:  ``{"uid": "...", "label": "..."}`` or
  ``{"uid": "...", "answer_text": "..."}`` on stdout, in request order

Measured runs are strictly sequential (batch size 1: never two requests in
flight) and globally serialized through a process-wide lock, because a
co-resident run would corrupt both throughput and memory numbers.
Interactive single predictions share the same lock, so they queue behind a
measured run instead of polluting it.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import psutil

from .core import MetricRecord, ModelEntry, TaskConfig
from .errors import (
    BoardError,
    EmptyDataset,
    MemoryLimitExceeded,
    ModelCrashed,
    ModelTimeout,
    ProcessGone,
    ProtocolViolation,
    ValidationError,
)
from .metrics import GoldExample, Prediction, get_metric
from .perturb import (
    FAIRNESS_KINDS,
    ROBUSTNESS_TRANSFORMS,
    FairnessLexicon,
    perturb_dataset,
    unchanged_fraction,
)

GIB = 1024 ** 3

# Metric ids the runner measures itself; everything else in a task's
# catalog is treated as a performance metric computed from predictions.
MEASURED_METRICS = ("throughput", "memory", "fairness", "robustness")

# One measured run (or interactive prediction) per host at a time.
_JOB_LOCK = threading.RLock()


@dataclass(frozen=True)
class RunLimits:
    per_example_timeout: float = 30.0
    handshake_timeout: float = 60.0
    memory_cap_gib: float = 16.0
    sample_interval: float = 0.1


@dataclass(frozen=True)
class RunReport:
    """Everything measured in one model-on-dataset run."""

    model_id: str
    dataset_id: str
    predictions: tuple[Prediction, ...]
    wall_seconds: float
    examples_per_second: float
    memory_avg_gib: float
    memory_peak_gib: float
    sample_count: int
    exit_status: int | None


class ModelProcess:
    """A live model subprocess speaking the line protocol."""

    def __init__(self, exec_ref: str, handshake_timeout: float = 60.0):
        self.exec_ref = exec_ref
        argv = _argv_for(exec_ref)
        try:
            self.proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ModelCrashed(f"could not start model process: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._line_no = 0
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._handshake(handshake_timeout)

    def _pump(self):
        assert self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF

    def _read_line(self, timeout: float) -> str:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ModelTimeout(
                f"model produced no output within {timeout:.1f} s"
            ) from None
        if line is None:
            status = self.proc.wait()
            raise ModelCrashed(f"model process exited with status {status}", exit_status=status)
        self._line_no += 1
        return line

    def _handshake(self, timeout: float):
        line = self._read_line(timeout)
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation(self._line_no, f"handshake is not JSON: {exc}") from exc
        if doc.get("status") != "ready":
            raise ProtocolViolation(self._line_no, f"expected ready handshake, got {doc!r}")

    @property
    def pid(self) -> int:
        return self.proc.pid

    @property
    def lines_read(self) -> int:
        return self._line_no

    def alive(self) -> bool:
        return self.proc.poll() is None

    def request(self, payload: dict, timeout: float) -> dict:
        """One request/response round trip; the caller guarantees no other
        request is in flight."""
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(json.dumps(payload) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            status = self.proc.poll()
            raise ModelCrashed(f"model stdin closed: {exc}", exit_status=status) from exc
        line = self._read_line(timeout)
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation(self._line_no, f"response is not JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ProtocolViolation(self._line_no, "response must be a JSON object")
        return doc

    def close(self):
        if self.proc.poll() is None:
            try:
                if self.proc.stdin:
                    self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


def _argv_for(exec_ref: str) -> list[str]:
    # exec_ref may carry arguments ("model.py positive"); .py programs run
    # under the current interpreter so fixtures need no chmod/shebang.
    argv = shlex.split(exec_ref)
    if not argv:
        raise ValidationError("exec_ref is empty", field="exec_ref")
    if argv[0].endswith(".py"):
        return [sys.executable, *argv]
    return argv


class MemorySampler:
    """Samples a process's resident set on a fixed interval from a thread.

    Takes one sample immediately on start so even sub-interval runs get a
    memory figure, then one per interval until stopped.  Flags (and kills)
    the process if a sample crosses the cap.
    """

    def __init__(self, pid: int, interval: float, cap_gib: float | None = None):
        self.interval = interval
        self.cap_gib = cap_gib
        self.samples_gib: list[float] = []
        self.exceeded = False
        self._proc = psutil.Process(pid)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self):
        # First sample is taken synchronously so even a sub-interval run
        # ends up with at least one.
        self._sample_once()
        self._thread.start()

    def _sample_once(self) -> bool:
        try:
            rss = self._proc.memory_info().rss
        except psutil.NoSuchProcess:
            return False
        gib = rss / GIB
        self.samples_gib.append(gib)
        if self.cap_gib is not None and gib > self.cap_gib:
            self.exceeded = True
            try:
                self._proc.kill()
            except psutil.NoSuchProcess:
                pass
            return False
        return True

    def _run(self):
        while not self._stop.is_set():
            self._stop.wait(self.interval)
            if self._stop.is_set():
                break
            if not self._sample_once():
                break

    def abort(self):
        """Stop sampling without demanding stats (error paths)."""
        self._stop.set()
        if self._thread.is_alive():
            self._thread.join()

    def stop(self) -> tuple[float, float, int]:
        self.abort()
        return summarize_memory(self.samples_gib)


def summarize_memory(samples_gib: list[float]) -> tuple[float, float, int]:
    """(average, peak, count) over resident-set samples, in GiB."""
    if not samples_gib:
        raise ProcessGone("no memory samples were obtained")
    return (sum(samples_gib) / len(samples_gib), max(samples_gib), len(samples_gib))


def sample_memory(
    process: subprocess.Popen | ModelProcess,
    interval: float = 0.1,
    duration: float | None = None,
) -> tuple[float, float, int]:
    """Sample a process's resident set every ``interval`` seconds until it
    exits (or ``duration`` elapses) and return (avg_gib, peak_gib, count)."""
    pid = process.pid
    deadline = None if duration is None else time.monotonic() + duration
    samples: list[float] = []
    try:
        proc = psutil.Process(pid)
        while True:
            try:
                samples.append(proc.memory_info().rss / GIB)
            except psutil.NoSuchProcess:
                break
            if deadline is not None and time.monotonic() >= deadline:
                break
            time.sleep(interval)
    except psutil.NoSuchProcess:
        pass
    return summarize_memory(samples)


def _payload_for(example: GoldExample) -> dict:
    return {"uid": example.uid, **example.input}


def _parse_prediction(doc: dict, expected_uid: str, line_no: int) -> Prediction:
    uid = doc.get("uid")
    if uid != expected_uid:
        raise ProtocolViolation(line_no, f"uid {uid!r} does not echo request uid {expected_uid!r}")
    label = doc.get("label")
    answer = doc.get("answer_text")
    if (label is None) == (answer is None):
        raise ProtocolViolation(
            line_no, "response must carry exactly one of label / answer_text"
        )
    return Prediction(uid=expected_uid, label=label, answer_text=answer)


def run_evaluation(
    model: ModelEntry,
    dataset_id: str,
    examples: list[GoldExample],
    limits: RunLimits = RunLimits(),
) -> RunReport:
    """Run a model over a dataset, one in-flight request at a time, and
    measure throughput and memory.

    The clock starts at the first request and stops at the last response,
    so process start-up and the handshake are excluded: the figure is
    inference throughput, not load time.  Memory is sampled on a fixed
    interval over that same window.
    """
    if not examples:
        raise EmptyDataset(f"dataset {dataset_id!r} is empty")
    with _JOB_LOCK:
        proc = ModelProcess(model.exec_ref, handshake_timeout=limits.handshake_timeout)
        sampler = MemorySampler(proc.pid, limits.sample_interval, cap_gib=limits.memory_cap_gib)
        try:
            predictions: list[Prediction] = []
            sampler.start()
            started = time.monotonic()
            for example in examples:
                try:
                    doc = proc.request(_payload_for(example), timeout=limits.per_example_timeout)
                except (ModelCrashed, ModelTimeout):
                    if sampler.exceeded:
                        raise MemoryLimitExceeded(
                            f"model {model.model_id!r} crossed the "
                            f"{limits.memory_cap_gib} GiB memory cap"
                        ) from None
                    raise
                predictions.append(_parse_prediction(doc, example.uid, proc.lines_read))
            wall = max(time.monotonic() - started, 1e-9)
        except BaseException:
            sampler.abort()
            proc.close()
            raise
        avg_gib, peak_gib, count = sampler.stop()
        exit_status = proc.proc.poll()
        proc.close()
        return RunReport(
            model_id=model.model_id,
            dataset_id=dataset_id,
            predictions=tuple(predictions),
            wall_seconds=wall,
            examples_per_second=len(examples) / wall,
            memory_avg_gib=avg_gib,
            memory_peak_gib=peak_gib,
            sample_count=count,
            exit_status=exit_status,
        )


class ModelSession:
    """A kept-warm model process for interactive predictions.

    Each prediction is one round trip, serialized behind the same global
    lock as measured runs, so interactive traffic can never overlap a
    measurement (it just waits its turn).
    """

    def __init__(self, entry: ModelEntry, limits: RunLimits = RunLimits()):
        self.entry = entry
        self.limits = limits
        self._proc: ModelProcess | None = None

    def _ensure_process(self) -> ModelProcess:
        if self._proc is None or not self._proc.alive():
            self._proc = ModelProcess(
                self.entry.exec_ref, handshake_timeout=self.limits.handshake_timeout
            )
        return self._proc

    def predict(self, input_fields: dict, timeout: float | None = None) -> tuple[Prediction, float]:
        """One prediction plus its latency in milliseconds."""
        timeout = timeout if timeout is not None else self.limits.per_example_timeout
        with _JOB_LOCK:
            proc = self._ensure_process()
            uid = f"interactive-{time.monotonic_ns()}"
            started = time.monotonic()
            try:
                doc = proc.request({"uid": uid, **input_fields}, timeout=timeout)
            except (ModelCrashed, ModelTimeout):
                self.close()
                raise
            latency_ms = (time.monotonic() - started) * 1000.0
            return _parse_prediction(doc, uid, proc.lines_read), latency_ms

    def close(self):
        if self._proc is not None:
            self._proc.close()
            self._proc = None


def predict_one(
    model: ModelEntry,
    input_fields: dict,
    timeout: float = 30.0,
) -> tuple[Prediction, float]:
    """Convenience single-shot prediction with a throwaway process."""
    session = ModelSession(model, RunLimits(per_example_timeout=timeout))
    try:
        return session.predict(input_fields, timeout=timeout)
    finally:
        session.close()


def evaluate_model_on_task(
    model: ModelEntry,
    task: TaskConfig,
    load_examples,
    lexicon: FairnessLexicon | None,
    seed: int,
    limits: RunLimits = RunLimits(),
) -> list[MetricRecord]:
    """Produce the complete metric row for one model on one task.

    Every scoring dataset is run for performance, throughput and memory,
    then its fairness- and robustness-perturbed counterparts are run and
    stability computed as the fraction of unchanged predictions.  One
    record per (dataset, metric) cell the task declares comes back, or an
    error tagged with the offending dataset — never a partial row.

    ``load_examples`` maps a DatasetRef to its examples (usually
    ``store.load_dataset`` on the ref's path).
    """
    records: list[MetricRecord] = []
    needs_fairness = "fairness" in task.metric_ids
    if needs_fairness and lexicon is None:
        raise ValidationError("task declares a fairness metric but no lexicon was supplied")

    for ref in task.datasets:
        try:
            examples = load_examples(ref)
            report = run_evaluation(model, ref.dataset_id, examples, limits=limits)
            orig_preds = {p.uid: p for p in report.predictions}
            stamp = _utc_now()

            for metric_id in task.metric_ids:
                if metric_id in MEASURED_METRICS:
                    continue
                value = get_metric(metric_id)(list(report.predictions), examples)
                records.append(_record(model, ref, metric_id, value, stamp))

            if "throughput" in task.metric_ids:
                records.append(
                    _record(model, ref, "throughput", report.examples_per_second, stamp)
                )
            if "memory" in task.metric_ids:
                records.append(_record(model, ref, "memory", report.memory_avg_gib, stamp))

            if "fairness" in task.metric_ids:
                value = _stability(
                    model, ref, examples, orig_preds, list(FAIRNESS_KINDS), seed,
                    lexicon, limits,
                )
                records.append(_record(model, ref, "fairness", value, stamp))
            if "robustness" in task.metric_ids:
                kinds = [f"robustness:{t}" for t in ROBUSTNESS_TRANSFORMS]
                value = _stability(
                    model, ref, examples, orig_preds, kinds, seed, lexicon, limits,
                )
                records.append(_record(model, ref, "robustness", value, stamp))
        except BoardError as exc:
            # tag with the dataset, preserving the error type and attributes
            exc.args = (f"dataset {ref.dataset_id!r}: {exc}",)
            raise
    return records


def _stability(
    model: ModelEntry,
    ref,
    examples: list[GoldExample],
    orig_preds: dict[str, Prediction],
    kinds: list[str],
    seed: int,
    lexicon: FairnessLexicon | None,
    limits: RunLimits,
) -> float:
    perturbed, report = perturb_dataset(examples, kinds, seed, lexicon=lexicon)
    if not perturbed:
        raise EmptyDataset(
            f"no example in {ref.dataset_id!r} was perturbable for {kinds}; "
            f"skips: {report.to_dict()}"
        )
    perturbed_examples = [p.as_gold_example() for p in perturbed]
    run = run_evaluation(model, f"{ref.dataset_id}:perturbed", perturbed_examples, limits=limits)
    originals = [orig_preds[p.uid] for p in perturbed]
    return unchanged_fraction(originals, list(run.predictions))


def _record(model: ModelEntry, ref, metric_id: str, value: float, stamp: str) -> MetricRecord:
    return MetricRecord(
        model_id=model.model_id,
        dataset_id=ref.dataset_id,
        metric_id=metric_id,
        value=value,
        measured_at=stamp,
    )


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()
