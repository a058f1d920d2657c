"""HTTP service: leaderboard scoring with custom weights, model
submission, serialized evaluation jobs, and real-time model interaction.

Errors come back as ``{"code": ..., "message": ..., "field": ...?}``.
Scoring reads an immutable snapshot of the latest records per request, so
concurrent scoring is safe; evaluation jobs run one at a time behind the
runner's global lock.
"""

from __future__ import annotations

import os
import queue
import threading
import uuid
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .core import ModelEntry
from .errors import (
    BoardError,
    EmptyWeights,
    ModelCrashed,
    ModelTimeout,
    NegativeWeight,
    NoModels,
    ProtocolViolation,
    UnknownDataset,
    UnknownMetric,
    ValidationError,
    ZeroTotal,
)
from .fixtures import load_lexicon
from .runner import ModelSession, RunLimits, evaluate_model_on_task
from .service import build_weight_spec, default_weight_spec, score_task
from .store import Store


class ScoreRequest(BaseModel):
    metric_weights: dict[str, float] | None = None
    dataset_weights: dict[str, float] | None = None
    as_of: str | None = None


class JobRequest(BaseModel):
    model_id: str
    task_id: str
    seed: int = 0


class PredictRequest(BaseModel):
    input: dict


@dataclass
class Job:
    job_id: str
    model_id: str
    task_id: str
    seed: int
    status: str = "queued"
    error: str | None = None
    record_count: int = 0

    def to_dict(self) -> dict:
        doc = {
            "job_id": self.job_id,
            "model_id": self.model_id,
            "task_id": self.task_id,
            "status": self.status,
            "record_count": self.record_count,
        }
        if self.error is not None:
            doc["error"] = self.error
        return doc


class JobManager:
    """Serial evaluation worker: one job running at any instant, records
    committed atomically when a job finishes."""

    def __init__(self, store: Store, limits: RunLimits):
        self.store = store
        self.limits = limits
        self.jobs: dict[str, Job] = {}
        self._queue: queue.Queue = queue.Queue()
        self._lock = threading.Lock()
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def submit(self, model_id: str, task_id: str, seed: int) -> Job:
        job = Job(job_id=uuid.uuid4().hex, model_id=model_id, task_id=task_id, seed=seed)
        with self._lock:
            self.jobs[job.job_id] = job
        self._queue.put(job)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            return self.jobs[job_id]

    def _run(self):
        while True:
            job = self._queue.get()
            job.status = "running"
            try:
                model = self.store.load_model(job.model_id)
                task = self.store.load_task(job.task_id)
                records = evaluate_model_on_task(
                    model,
                    task,
                    lambda ref: self.store.load_dataset(ref.path),
                    load_lexicon(),
                    job.seed,
                    limits=self.limits,
                )
                self.store.append_records(task.task_id, records)
                job.record_count = len(records)
                job.status = "done"
            except Exception as exc:  # job must record any failure
                job.status = "failed"
                job.error = f"{type(exc).__name__}: {exc}"


def create_app(data_dir: str | None = None, limits: RunLimits = RunLimits()) -> FastAPI:
    root = data_dir or os.environ.get("DYNA_DATA_DIR", "data")
    store = Store(root)
    app = FastAPI(title="evalboard")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.jobs = JobManager(store, limits)
    app.state.sessions = {}
    app.state.sessions_lock = threading.Lock()
    app.state.limits = limits

    @app.exception_handler(BoardError)
    async def board_error_handler(request: Request, exc: BoardError):
        status, code = _status_for(exc)
        body = {"code": code, "message": str(exc)}
        if isinstance(exc, ValidationError) and exc.field:
            body["field"] = exc.field
        return JSONResponse(status_code=status, content=body)

    def _task_or_404(task_id: str):
        try:
            return store.load_task(task_id)
        except KeyError:
            return None

    @app.get("/api/tasks")
    def list_tasks():
        return [task.to_dict() for task in store.list_tasks()]

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        task = _task_or_404(task_id)
        if task is None:
            return _not_found("unknown_task", task_id)
        return task.to_dict()

    @app.get("/api/tasks/{task_id}/leaderboard")
    def leaderboard(task_id: str):
        task = _task_or_404(task_id)
        if task is None:
            return _not_found("unknown_task", task_id)
        return score_task(store, task, default_weight_spec(task))

    @app.post("/api/tasks/{task_id}/score")
    def score(task_id: str, req: ScoreRequest):
        task = _task_or_404(task_id)
        if task is None:
            return _not_found("unknown_task", task_id)
        spec = build_weight_spec(task, req.metric_weights, req.dataset_weights)
        return score_task(store, task, spec, as_of=req.as_of)

    @app.post("/api/models", status_code=201)
    def submit_model(manifest: dict):
        entry = ModelEntry.from_dict(manifest)
        store.save_model(entry)
        return entry.to_dict()

    @app.get("/api/models")
    def list_models():
        return [entry.to_dict() for entry in store.list_models()]

    @app.get("/api/models/{model_id}")
    def get_model(model_id: str):
        try:
            return store.load_model(model_id).to_dict()
        except KeyError:
            return _not_found("unknown_model", model_id)

    @app.post("/api/jobs", status_code=202)
    def submit_job(req: JobRequest):
        try:
            store.load_model(req.model_id)
        except KeyError:
            return _not_found("unknown_model", req.model_id)
        task = _task_or_404(req.task_id)
        if task is None:
            return _not_found("unknown_task", req.task_id)
        job = app.state.jobs.submit(req.model_id, req.task_id, req.seed)
        return job.to_dict()

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            return app.state.jobs.get(job_id).to_dict()
        except KeyError:
            return _not_found("unknown_job", job_id)

    @app.post("/api/models/{model_id}/predict")
    def predict(model_id: str, req: PredictRequest):
        try:
            entry = store.load_model(model_id)
        except KeyError:
            return _not_found("unknown_model", model_id)
        with app.state.sessions_lock:
            session = app.state.sessions.get(model_id)
            if session is None:
                session = ModelSession(entry, app.state.limits)
                app.state.sessions[model_id] = session
        try:
            prediction, latency_ms = session.predict(req.input)
        except ModelTimeout as exc:
            return JSONResponse(
                status_code=504, content={"code": "timeout", "message": str(exc)}
            )
        except (ModelCrashed, ProtocolViolation) as exc:
            return JSONResponse(
                status_code=503, content={"code": "model_unavailable", "message": str(exc)}
            )
        return {"prediction": prediction.to_dict(), "latency_ms": latency_ms}

    return app


def _not_found(code: str, ident: str) -> JSONResponse:
    return JSONResponse(
        status_code=404, content={"code": code, "message": f"{code.replace('_', ' ')}: {ident!r}"}
    )


def _status_for(exc: BoardError) -> tuple[int, str]:
    if isinstance(exc, NoModels):
        return 409, "no_models"
    if isinstance(exc, ModelTimeout):
        return 504, "timeout"
    if isinstance(exc, (ModelCrashed, ProtocolViolation)):
        return 503, "model_unavailable"
    if isinstance(exc, (UnknownMetric, UnknownDataset)):
        return 400, "unknown_id"
    if isinstance(exc, (NegativeWeight, ZeroTotal, EmptyWeights)):
        return 400, "invalid_weights"
    if isinstance(exc, ValidationError):
        return 400, "validation_error"
    return 400, type(exc).__name__


def main(port: int = 8080, data_dir: str | None = None, host: str = "127.0.0.1"):
    import uvicorn

    uvicorn.run(create_app(data_dir), host=host, port=port)
