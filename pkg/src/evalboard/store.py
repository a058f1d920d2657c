"""File-backed persistence: tasks, datasets, model entries, append-only
results logs, and immutable leaderboard snapshots.

Layout under the store root::

    tasks/<task_id>.json        task configs
    datasets/<dataset_id>.jsonl one example per line: {uid, input, gold}
    models/<model_id>.json      model manifests
    results/<task_id>.jsonl     append-only metric records
    snapshots/<name>.json       leaderboard snapshots (written atomically)

Appends take an advisory lock (single writer per log); readers never
block.  Snapshots go through a temp file + rename, so a concurrent reader
sees the old or the new document, never a torn one.
"""

from __future__ import annotations

import fcntl
import json
import os
import tempfile
from pathlib import Path

from .core import MetricRecord, ModelEntry, TaskConfig, WeightSpec
from .errors import ParseError, ValidationError
from .metrics import GoldExample
from .scoring import ExchangeRateTable, LeaderboardRow

SUBDIRS = ("tasks", "datasets", "models", "results", "snapshots")


class ResultsLog:
    """Append-only JSONL log of metric records for one task."""

    def __init__(self, path: Path):
        self.path = Path(path)

    @property
    def line_count(self) -> int:
        if not self.path.exists():
            return 0
        with open(self.path, encoding="utf-8") as fh:
            return sum(1 for line in fh if line.strip())

    def append(self, records: list[MetricRecord]) -> int:
        """Durably append all records (or none) and return the new line
        count.  Records are validated before anything touches the file."""
        lines = [json.dumps(rec.to_dict()) for rec in records]
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            try:
                if lines:
                    fh.write("\n".join(lines) + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
        return self.line_count

    def read_all(self) -> list[MetricRecord]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(MetricRecord.from_dict(json.loads(line)))
                except (json.JSONDecodeError, ValidationError) as exc:
                    raise ParseError(f"bad record at line {line_no}: {exc}", line_no=line_no) from exc
        return out


class Store:
    """All persistent state lives under one directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in SUBDIRS:
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # --- tasks ---------------------------------------------------------------

    def save_task(self, task: TaskConfig) -> Path:
        path = self.root / "tasks" / f"{task.task_id}.json"
        _atomic_write_json(path, task.to_dict())
        return path

    def load_task(self, task_id: str) -> TaskConfig:
        path = self.root / "tasks" / f"{task_id}.json"
        if not path.exists():
            raise KeyError(task_id)
        with open(path, encoding="utf-8") as fh:
            return TaskConfig.from_dict(json.load(fh))

    def list_tasks(self) -> list[TaskConfig]:
        out = []
        for path in sorted((self.root / "tasks").glob("*.json")):
            with open(path, encoding="utf-8") as fh:
                out.append(TaskConfig.from_dict(json.load(fh)))
        return out

    # --- datasets ------------------------------------------------------------

    def dataset_path(self, relative: str) -> Path:
        path = Path(relative)
        return path if path.is_absolute() else self.root / path

    def save_dataset(self, dataset_id: str, examples: list[GoldExample]) -> Path:
        path = self.root / "datasets" / f"{dataset_id}.jsonl"
        body = "".join(json.dumps(ex.to_dict()) + "\n" for ex in examples)
        _atomic_write_text(path, body)
        return path

    def load_dataset(self, relative_path: str) -> list[GoldExample]:
        path = self.dataset_path(relative_path)
        if not path.exists():
            raise FileNotFoundError(str(path))
        return load_dataset_file(path)

    # --- models --------------------------------------------------------------

    def save_model(self, entry: ModelEntry) -> Path:
        path = self.root / "models" / f"{entry.model_id}.json"
        _atomic_write_json(path, entry.to_dict())
        return path

    def load_model(self, model_id: str) -> ModelEntry:
        path = self.root / "models" / f"{model_id}.json"
        if not path.exists():
            raise KeyError(model_id)
        with open(path, encoding="utf-8") as fh:
            return ModelEntry.from_dict(json.load(fh))

    def list_models(self) -> list[ModelEntry]:
        out = []
        for path in sorted((self.root / "models").glob("*.json")):
            with open(path, encoding="utf-8") as fh:
                out.append(ModelEntry.from_dict(json.load(fh)))
        return out

    # --- results -------------------------------------------------------------

    def results_log(self, task_id: str) -> ResultsLog:
        return ResultsLog(self.root / "results" / f"{task_id}.jsonl")

    def append_records(self, task_id: str, records: list[MetricRecord]) -> int:
        return self.results_log(task_id).append(records)

    def latest_records(
        self, task_id: str, as_of: str | None = None
    ) -> dict[tuple[str, str, str], MetricRecord]:
        """Latest record per (model, dataset, metric) cell for a task, in
        append order so re-evaluation supersedes earlier runs.  ``as_of``
        restricts to records measured at or before that ISO timestamp."""
        out: dict[tuple[str, str, str], MetricRecord] = {}
        for rec in self.results_log(task_id).read_all():
            if as_of is not None and rec.measured_at > as_of:
                continue
            out[(rec.model_id, rec.dataset_id, rec.metric_id)] = rec
        return out

    # --- snapshots -----------------------------------------------------------

    def snapshot_leaderboard(
        self,
        task_id: str,
        rows: list[LeaderboardRow],
        rates: ExchangeRateTable,
        weight_spec: WeightSpec,
        timestamp: str,
    ) -> Path:
        """Persist a self-contained snapshot: rows plus the exchange rates,
        the exact weight spec, and the timestamp they were computed under."""
        if not rows:
            raise ValidationError("snapshot needs at least one row", field="rows")
        if weight_spec is None:
            raise ValidationError("snapshot needs the weight spec it was scored under",
                                  field="weight_spec")
        doc = {
            "task_id": task_id,
            "timestamp": timestamp,
            "weight_spec": weight_spec.to_dict(),
            "exchange_rates": rates.to_dict(),
            "rows": [row.to_dict() for row in rows],
        }
        safe_ts = timestamp.replace(":", "").replace("+", "Z")
        path = self.root / "snapshots" / f"{task_id}-{safe_ts}.json"
        _atomic_write_json(path, doc)
        return path

    def load_snapshot(self, path: str | Path) -> dict:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)


def load_dataset_file(path: str | Path) -> list[GoldExample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(GoldExample.from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as exc:
                raise ParseError(f"bad example at line {line_no}: {exc}", line_no=line_no) from exc
    return out


def _atomic_write_text(path: Path, body: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(body)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_json(path: Path, doc: dict) -> None:
    _atomic_write_text(path, json.dumps(doc, indent=2) + "\n")
