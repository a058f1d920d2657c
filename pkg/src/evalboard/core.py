"""Domain model, weight normalization, goods transformation, and
dataset-level aggregation of raw metric records into per-model vectors.

All types are immutable after construction and every operation here is a
pure function, so everything in this module is safe to call from any
number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    CapExceeded,
    EmptyWeights,
    MissingCap,
    MissingCell,
    NegativeWeight,
    UnknownDataset,
    UnknownMetric,
    ValidationError,
    ZeroTotal,
)

DEFAULT_EPSILON = 1e-4


@dataclass(frozen=True)
class MetricSpec:
    """One column of a task's metric catalog.

    ``direction`` says whether more is better.  Minimize-direction metrics
    are turned into goods by subtracting from ``cap`` (e.g. memory used
    becomes memory saved); ``cap`` may be left unset, in which case it is
    resolved at aggregation time as the maximum observed value across the
    models being scored.
    """

    metric_id: str
    unit: str
    direction: str = "maximize"
    cap: float | None = None

    def __post_init__(self):
        if self.direction not in ("maximize", "minimize"):
            raise ValidationError(
                f"direction must be maximize or minimize, got {self.direction!r}",
                field="direction",
            )
        if self.cap is not None and self.cap <= 0:
            raise ValidationError("cap must be positive when present", field="cap")


@dataclass(frozen=True)
class DatasetRef:
    dataset_id: str
    path: str
    default_weight: float = 1.0

    def __post_init__(self):
        if self.default_weight < 0:
            raise ValidationError("default_weight must be nonnegative", field="default_weight")


@dataclass(frozen=True)
class TaskConfig:
    """A benchmark task: metric catalog, canonical performance metric,
    datasets with default weights, and the epsilon threshold below which
    performance gaps are treated as noise."""

    task_id: str
    name: str
    perf_metric_id: str
    metrics: tuple[MetricSpec, ...]
    datasets: tuple[DatasetRef, ...]
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        metric_ids = [m.metric_id for m in self.metrics]
        if len(set(metric_ids)) != len(metric_ids):
            raise ValidationError("metric identifiers must be unique", field="metrics")
        if metric_ids.count(self.perf_metric_id) != 1:
            raise ValidationError(
                f"perf_metric_id {self.perf_metric_id!r} must appear exactly once in metrics",
                field="perf_metric_id",
            )
        dataset_ids = [d.dataset_id for d in self.datasets]
        if not dataset_ids:
            raise ValidationError("a task needs at least one dataset", field="datasets")
        if len(set(dataset_ids)) != len(dataset_ids):
            raise ValidationError("dataset identifiers must be unique", field="datasets")
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive", field="epsilon")

    @property
    def metric_ids(self) -> list[str]:
        return [m.metric_id for m in self.metrics]

    @property
    def dataset_ids(self) -> list[str]:
        return [d.dataset_id for d in self.datasets]

    def metric(self, metric_id: str) -> MetricSpec:
        for m in self.metrics:
            if m.metric_id == metric_id:
                return m
        raise UnknownMetric(f"unknown metric {metric_id!r} for task {self.task_id!r}")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "name": self.name,
            "perf_metric_id": self.perf_metric_id,
            "metrics": [
                {
                    "metric_id": m.metric_id,
                    "unit": m.unit,
                    "direction": m.direction,
                    **({"cap": m.cap} if m.cap is not None else {}),
                }
                for m in self.metrics
            ],
            "datasets": [
                {"dataset_id": d.dataset_id, "path": d.path, "default_weight": d.default_weight}
                for d in self.datasets
            ],
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TaskConfig":
        try:
            return cls(
                task_id=doc["task_id"],
                name=doc["name"],
                perf_metric_id=doc["perf_metric_id"],
                metrics=tuple(
                    MetricSpec(
                        metric_id=m["metric_id"],
                        unit=m["unit"],
                        direction=m.get("direction", "maximize"),
                        cap=m.get("cap"),
                    )
                    for m in doc["metrics"]
                ),
                datasets=tuple(
                    DatasetRef(
                        dataset_id=d["dataset_id"],
                        path=d["path"],
                        default_weight=d.get("default_weight", 1.0),
                    )
                    for d in doc["datasets"]
                ),
                epsilon=doc.get("epsilon", DEFAULT_EPSILON),
            )
        except KeyError as exc:
            raise ValidationError(f"task config missing field {exc}", field=str(exc)) from exc


@dataclass(frozen=True)
class ModelEntry:
    """A submitted model: where its executable lives plus its model card."""

    model_id: str
    name: str
    owner: str
    task_id: str
    exec_ref: str
    model_card: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.exec_ref:
            raise ValidationError("exec_ref must be non-empty", field="exec_ref")
        if not self.model_id:
            raise ValidationError("model_id must be non-empty", field="model_id")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "name": self.name,
            "owner": self.owner,
            "task_id": self.task_id,
            "exec_ref": self.exec_ref,
            "model_card": dict(self.model_card),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelEntry":
        try:
            return cls(
                model_id=doc["model_id"],
                name=doc.get("name", doc["model_id"]),
                owner=doc.get("owner", ""),
                task_id=doc["task_id"],
                exec_ref=doc["exec_ref"],
                model_card=doc.get("model_card", {}),
            )
        except KeyError as exc:
            raise ValidationError(f"model manifest missing field {exc}", field=str(exc)) from exc


@dataclass(frozen=True)
class MetricRecord:
    """One measured value for (model, dataset, metric) in natural units."""

    model_id: str
    dataset_id: str
    metric_id: str
    value: float
    measured_at: str

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValidationError(
                f"value for {self.metric_id!r} must be finite, got {self.value!r}",
                field="value",
            )

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "metric_id": self.metric_id,
            "value": self.value,
            "measured_at": self.measured_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricRecord":
        try:
            return cls(
                model_id=doc["model_id"],
                dataset_id=doc["dataset_id"],
                metric_id=doc["metric_id"],
                value=doc["value"],
                measured_at=doc["measured_at"],
            )
        except KeyError as exc:
            raise ValidationError(f"metric record missing field {exc}", field=str(exc)) from exc


@dataclass(frozen=True)
class WeightSpec:
    """Unnormalized nonnegative metric and dataset weights, as supplied by
    task owners (defaults) or leaderboard viewers (sliders)."""

    metric_weights: dict[str, float]
    dataset_weights: dict[str, float]

    def __post_init__(self):
        for name, weights in (("metric_weights", self.metric_weights),
                              ("dataset_weights", self.dataset_weights)):
            if not weights:
                raise EmptyWeights(f"{name} must not be empty")
            for key, value in weights.items():
                if value < 0:
                    raise NegativeWeight(f"{name}[{key!r}] is negative: {value}")
            if sum(weights.values()) <= 0:
                raise ZeroTotal(f"{name} sum to zero")

    def to_dict(self) -> dict:
        return {
            "metric_weights": dict(self.metric_weights),
            "dataset_weights": dict(self.dataset_weights),
        }


@dataclass(frozen=True)
class ModelMetrics:
    """A model as a point in the space of goods: dataset-aggregated,
    goods-transformed value per metric."""

    model_id: str
    values: dict[str, float]


def normalize_weights(raw: dict[str, float]) -> dict[str, float]:
    """Scale a nonnegative weight map so it sums to one.

    Raises EmptyWeights, NegativeWeight, or ZeroTotal instead of producing
    NaNs.  Normalizing an already-normalized map is a fixed point (within
    1e-12).
    """
    if not raw:
        raise EmptyWeights("no weights supplied")
    for key, value in raw.items():
        if value < 0:
            raise NegativeWeight(f"weight for {key!r} is negative: {value}")
    total = sum(raw.values())
    if total <= 0:
        raise ZeroTotal("weights sum to zero")
    return {key: value / total for key, value in raw.items()}


def default_weights(metric_ids: list[str], perf_metric_id: str) -> dict[str, float]:
    """Default normalized metric weights: the canonical performance metric
    gets half, the rest is split evenly among the other metrics."""
    if perf_metric_id not in metric_ids:
        raise UnknownMetric(f"perf metric {perf_metric_id!r} not in {metric_ids}")
    m = len(metric_ids)
    if m == 1:
        return {perf_metric_id: 1.0}
    share = 0.5 / (m - 1)
    return {mid: (0.5 if mid == perf_metric_id else share) for mid in metric_ids}


def to_good(value: float, spec: MetricSpec, cap: float | None = None) -> float:
    """Turn a raw metric value into a good (a quantity one wants more of).

    Maximize-direction values pass through; minimize-direction values are
    subtracted from the cap, so e.g. memory used becomes memory saved.
    ``cap`` overrides ``spec.cap`` (used when the cap was resolved from the
    model pool).
    """
    if spec.direction == "maximize":
        return value
    resolved = cap if cap is not None else spec.cap
    if resolved is None:
        raise MissingCap(f"minimize metric {spec.metric_id!r} has no resolvable cap")
    if value > resolved:
        raise CapExceeded(
            f"{spec.metric_id!r} value {value} exceeds cap {resolved}; goods must be >= 0"
        )
    return resolved - value


def resolve_cap(spec: MetricSpec, values: list[float]) -> float:
    """The cap for a minimize metric: explicit if configured, otherwise the
    maximum of that metric across the models currently being scored."""
    if spec.cap is not None:
        return spec.cap
    if not values:
        raise MissingCap(f"minimize metric {spec.metric_id!r} has no values to infer a cap from")
    return max(values)


def aggregate_raw_means(
    records: list[MetricRecord],
    dataset_weights: dict[str, float],
    task: TaskConfig,
) -> dict[str, dict[str, float]]:
    """Weighted mean per (model, metric) over datasets with nonzero weight,
    in natural units (no goods transformation).  Used for display columns.

    Requires a complete grid: every model must have a record for every
    (nonzero-weight dataset, metric) cell.
    """
    for did in dataset_weights:
        if did not in task.dataset_ids:
            raise UnknownDataset(f"unknown dataset {did!r} for task {task.task_id!r}")
    active = {d: w for d, w in dataset_weights.items() if w > 0}
    norm = normalize_weights(active)
    cells: dict[tuple[str, str, str], float] = {}
    model_ids: set[str] = set()
    for rec in records:
        cells[(rec.model_id, rec.dataset_id, rec.metric_id)] = rec.value
        model_ids.add(rec.model_id)
    means: dict[str, dict[str, float]] = {}
    for model_id in sorted(model_ids):
        per_metric: dict[str, float] = {}
        for metric_id in task.metric_ids:
            acc = 0.0
            for dataset_id, weight in norm.items():
                key = (model_id, dataset_id, metric_id)
                if key not in cells:
                    raise MissingCell(model_id, dataset_id, metric_id)
                acc += weight * cells[key]
            per_metric[metric_id] = acc
        means[model_id] = per_metric
    return means


def aggregate_datasets(
    records: list[MetricRecord],
    dataset_weights: dict[str, float],
    task: TaskConfig,
) -> list[ModelMetrics]:
    """Aggregate raw records into one goods-transformed vector per model.

    Datasets are averaged first (weighted mean per metric, weights
    normalized over the nonzero entries), then each metric is mapped to a
    good via :func:`to_good`.  Minimize metrics without an explicit cap get
    one resolved from the current model pool.
    """
    means = aggregate_raw_means(records, dataset_weights, task)
    caps: dict[str, float] = {}
    for spec in task.metrics:
        if spec.direction == "minimize":
            caps[spec.metric_id] = resolve_cap(
                spec, [per_metric[spec.metric_id] for per_metric in means.values()]
            )
    out = []
    for model_id in sorted(means):
        values = {}
        for spec in task.metrics:
            raw = means[model_id][spec.metric_id]
            values[spec.metric_id] = to_good(raw, spec, cap=caps.get(spec.metric_id))
        out.append(ModelMetrics(model_id=model_id, values=values))
    return out
