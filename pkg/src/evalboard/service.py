"""Shared scoring service: one code path that turns (store, task, weights)
into a leaderboard response, used identically by the HTTP API and the CLI
so both surfaces emit the same numbers.
"""

from __future__ import annotations

from .core import TaskConfig, WeightSpec, default_weights, normalize_weights
from .errors import NegativeWeight, NoModels, UnknownDataset, UnknownMetric
from .scoring import (
    RankingResult,
    effective_exchange_rates,
    rank_leaderboard,
    utc_now,
)
from .store import Store

# Shown by every client next to dynascore values.
DISCLAIMER = (
    "Dynascore values are relative to this leaderboard's current model pool, "
    "metric and dataset weights, and scoring time; they change as models are "
    "added and are not comparable across tasks. When citing a score, report "
    "the weights and the timestamp alongside it."
)


def default_weight_spec(task: TaskConfig) -> WeightSpec:
    """Task-owner defaults: performance gets half the metric weight, the
    rest is split evenly; dataset weights come from the task config."""
    return WeightSpec(
        metric_weights=default_weights(task.metric_ids, task.perf_metric_id),
        dataset_weights={d.dataset_id: d.default_weight for d in task.datasets},
    )


def build_weight_spec(
    task: TaskConfig,
    metric_weights: dict[str, float] | None,
    dataset_weights: dict[str, float] | None,
) -> WeightSpec:
    """Turn user-supplied (possibly partial) weight maps into a WeightSpec.

    Unknown ids are rejected; ids the user omitted get weight zero, so
    "--weights perf=1" means performance only.  Omitting a whole map keeps
    the task defaults.
    """
    defaults = default_weight_spec(task)
    if metric_weights is None:
        metrics = defaults.metric_weights
    else:
        for mid, value in metric_weights.items():
            if mid not in task.metric_ids:
                raise UnknownMetric(f"unknown metric {mid!r} for task {task.task_id!r}")
            if value < 0:
                raise NegativeWeight(f"metric weight {mid!r} is negative: {value}")
        metrics = {mid: float(metric_weights.get(mid, 0.0)) for mid in task.metric_ids}
    if dataset_weights is None:
        datasets = defaults.dataset_weights
    else:
        for did, value in dataset_weights.items():
            if did not in task.dataset_ids:
                raise UnknownDataset(f"unknown dataset {did!r} for task {task.task_id!r}")
            if value < 0:
                raise NegativeWeight(f"dataset weight {did!r} is negative: {value}")
        datasets = {did: float(dataset_weights.get(did, 0.0)) for did in task.dataset_ids}
    return WeightSpec(metric_weights=metrics, dataset_weights=datasets)


def score_task(
    store: Store,
    task: TaskConfig,
    weight_spec: WeightSpec,
    as_of: str | None = None,
) -> dict:
    """Score a task's latest records under the given weights and return the
    full response payload (rows, exchange rates, context, warnings)."""
    cells = store.latest_records(task.task_id, as_of=as_of)
    if not cells:
        raise NoModels(f"no evaluation records for task {task.task_id!r}")
    result = rank_leaderboard(list(cells.values()), task, weight_spec)
    return build_response(task, weight_spec, result, as_of=as_of)


def build_response(
    task: TaskConfig,
    weight_spec: WeightSpec,
    result: RankingResult,
    as_of: str | None = None,
) -> dict:
    defaults = default_weights(task.metric_ids, task.perf_metric_id)
    user_norm = normalize_weights(weight_spec.metric_weights)
    rates_doc = result.rates.to_dict()
    rates_doc["effective_amrs"] = effective_exchange_rates(result.rates, defaults, user_norm)
    payload = {
        "task_id": task.task_id,
        "timestamp": utc_now(),
        "weight_spec": weight_spec.to_dict(),
        "exchange_rates": rates_doc,
        "rows": [row.to_dict() for row in result.rows],
        "warnings": list(result.warnings),
        "disclaimer": DISCLAIMER,
    }
    if as_of is not None:
        payload["as_of"] = as_of
    return payload
