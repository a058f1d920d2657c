"""Utility-based score aggregation and ranking.

Every metric is converted into units of the task's canonical performance
metric through its exchange rate: the average marginal rate of
substitution (AMRS) between that metric and performance, estimated from
the absolute slopes between consecutive models sorted by performance.
The dynascore is the weighted average of the converted values.  An
average-z-score baseline is computed alongside for comparison.

All functions are pure and deterministic; ExchangeRateTable and
LeaderboardRow are immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from statistics import mean, pstdev

from .core import (
    ModelMetrics,
    TaskConfig,
    WeightSpec,
    aggregate_datasets,
    aggregate_raw_means,
    normalize_weights,
)
from .errors import (
    EmptyMrsSet,
    MissingRate,
    NoModels,
    TooFewModels,
    ZeroAmrs,
)


@dataclass(frozen=True)
class RateEntry:
    """Exchange rate for one metric: units of metric per unit of performance."""

    amrs: float
    pair_count: int


@dataclass(frozen=True)
class ExchangeRateTable:
    """Per-metric exchange rates at a scoring instant.

    Rates depend on the model pool, so the table records which models it
    was computed over and when.  The performance metric's rate is 1 by
    definition.
    """

    perf_metric_id: str
    rates: dict[str, RateEntry]
    model_ids: tuple[str, ...]
    computed_at: str

    def amrs(self, metric_id: str) -> float:
        if metric_id not in self.rates:
            raise MissingRate(f"no exchange rate for metric {metric_id!r}")
        return self.rates[metric_id].amrs

    def to_dict(self) -> dict:
        return {
            "perf_metric_id": self.perf_metric_id,
            "metrics": {
                mid: {"amrs": entry.amrs, "pair_count": entry.pair_count}
                for mid, entry in self.rates.items()
            },
            "model_ids": list(self.model_ids),
            "computed_at": self.computed_at,
        }


@dataclass(frozen=True)
class LeaderboardRow:
    """One ranked model: raw per-metric display values (natural units,
    before the goods transformation), its dynascore, average z-score, and
    rank."""

    model_id: str
    raw_values: dict[str, float]
    dynascore: float
    avg_zscore: float
    rank: int

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "rank": self.rank,
            "dynascore": self.dynascore,
            "avg_zscore": self.avg_zscore,
            "raw_values": dict(self.raw_values),
        }


@dataclass(frozen=True)
class RankingResult:
    rows: tuple[LeaderboardRow, ...]
    rates: ExchangeRateTable
    warnings: tuple[str, ...] = field(default_factory=tuple)


def sort_by_performance(models: list[ModelMetrics], perf_metric_id: str) -> list[ModelMetrics]:
    """Performance descending, model_id ascending on ties (deterministic)."""
    return sorted(models, key=lambda m: (-m.values[perf_metric_id], m.model_id))


def mrs_set(
    models: list[ModelMetrics],
    metric_id: str,
    perf_metric_id: str,
    epsilon: float,
) -> list[float]:
    """Marginal rates of substitution between consecutive models.

    ``models`` must already be sorted by performance descending (ties
    broken by model_id ascending).  Each consecutive pair whose
    performance gap is at least ``epsilon`` contributes the absolute slope
    |delta metric| / (delta performance); pairs under the threshold are
    dropped entirely, since a sub-epsilon gap is indistinguishable from a
    tie and would make the slope blow up.
    """
    if len(models) < 2:
        raise TooFewModels(f"need at least two models, got {len(models)}")
    out = []
    for upper, lower in zip(models, models[1:]):
        gap = upper.values[perf_metric_id] - lower.values[perf_metric_id]
        if gap >= epsilon:
            out.append(abs(upper.values[metric_id] - lower.values[metric_id]) / gap)
    return out


def amrs(mrs: list[float]) -> float:
    """Arithmetic mean of an MRS set: the exchange rate for the metric.

    Raises EmptyMrsSet when no pair survived the epsilon threshold (all
    models perform effectively the same) and ZeroAmrs when the mean is
    zero (all models hold the same value of the metric, so the converted
    value would be undefined).
    """
    if not mrs:
        raise EmptyMrsSet("no performance gap reached the epsilon threshold")
    value = mean(mrs)
    if value == 0:
        raise ZeroAmrs("every slope is zero; the metric does not vary across models")
    return value


def exchange_rates(models: list[ModelMetrics], task: TaskConfig) -> ExchangeRateTable:
    """Exchange rate table over the given model pool.

    One entry per task metric.  The performance metric gets rate 1 by
    definition; every other metric's rate is the AMRS of its MRS set.
    Failures are re-raised tagged with the metric id.
    """
    if len(models) < 2:
        raise TooFewModels(f"need at least two models, got {len(models)}")
    ordered = sort_by_performance(models, task.perf_metric_id)
    rates: dict[str, RateEntry] = {}
    for metric_id in task.metric_ids:
        if metric_id == task.perf_metric_id:
            rates[metric_id] = _perf_rate_entry(ordered, task)
            continue
        terms = mrs_set(ordered, metric_id, task.perf_metric_id, task.epsilon)
        try:
            rates[metric_id] = RateEntry(amrs=amrs(terms), pair_count=len(terms))
        except (EmptyMrsSet, ZeroAmrs) as exc:
            raise type(exc)(f"metric {metric_id!r}: {exc}") from exc
    return ExchangeRateTable(
        perf_metric_id=task.perf_metric_id,
        rates=rates,
        model_ids=tuple(m.model_id for m in ordered),
        computed_at=utc_now(),
    )


def _perf_rate_entry(ordered: list[ModelMetrics], task: TaskConfig) -> RateEntry:
    # Every surviving pair's slope is |gap|/gap = 1 exactly, so the rate is
    # definitional; pair_count is floored at 1 to keep the entry well-formed
    # even when no pair survives (single model, or all ties).
    valid = sum(
        1
        for upper, lower in zip(ordered, ordered[1:])
        if upper.values[task.perf_metric_id] - lower.values[task.perf_metric_id] >= task.epsilon
    )
    return RateEntry(amrs=1.0, pair_count=max(valid, 1))


def dynascore(
    model: ModelMetrics,
    weights: dict[str, float],
    rates: ExchangeRateTable,
) -> float:
    """Weighted average of the model's values converted into performance
    units.  ``weights`` must be normalized; a rate must exist for every
    metric with nonzero weight.

    Plugging user-chosen normalized weights z into this formula is
    equivalent to keeping the default weights w and scaling each metric's
    exchange rate to (w/z) * AMRS, so custom weights are just custom
    exchange rates.
    """
    total = 0.0
    for metric_id, weight in weights.items():
        if weight == 0:
            continue
        total += weight * model.values[metric_id] / rates.amrs(metric_id)
    return total


def effective_exchange_rates(
    rates: ExchangeRateTable,
    default_w: dict[str, float],
    user_w: dict[str, float],
) -> dict[str, float]:
    """The exchange rate each metric effectively trades at under the
    user's normalized weights: (default weight / user weight) * AMRS.
    Metrics the user zeroed out are omitted (their effective rate would be
    infinite)."""
    out = {}
    for metric_id, entry in rates.rates.items():
        z = user_w.get(metric_id, 0.0)
        if z <= 0:
            continue
        out[metric_id] = (default_w.get(metric_id, 0.0) / z) * entry.amrs
    return out


def avg_zscore(models: list[ModelMetrics], weights: dict[str, float]) -> dict[str, float]:
    """Weighted average z-score per model over goods-transformed values.

    Population (divide-by-n) statistics; a metric with zero variance
    contributes 0 for every model.
    """
    if len(models) < 2:
        raise TooFewModels(f"need at least two models, got {len(models)}")
    scores = {m.model_id: 0.0 for m in models}
    for metric_id, weight in weights.items():
        if weight == 0:
            continue
        values = [m.values[metric_id] for m in models]
        mu = mean(values)
        sd = pstdev(values)
        if sd == 0:
            continue
        for m in models:
            scores[m.model_id] += weight * (m.values[metric_id] - mu) / sd
    return scores


def rank_leaderboard(
    records: list,
    task: TaskConfig,
    weight_spec: WeightSpec,
) -> RankingResult:
    """Full scoring pipeline: normalize weights, aggregate datasets,
    compute exchange rates, score, and rank.

    Metrics whose exchange rate is undefined (no epsilon-sized performance
    gap, or zero variation) are dropped from scoring with a warning and the
    remaining weights renormalized; the performance metric always remains
    available, so a single-model pool degrades to performance-only scoring
    rather than failing.  Rows are sorted by dynascore descending with
    model_id as tie-break, ranks run 1..n.
    """
    if not records:
        raise NoModels("no records to rank")
    metric_w = normalize_weights(weight_spec.metric_weights)
    for metric_id in metric_w:
        task.metric(metric_id)  # raises UnknownMetric on stray ids

    raw_means = aggregate_raw_means(records, weight_spec.dataset_weights, task)
    models = aggregate_datasets(records, weight_spec.dataset_weights, task)
    ordered = sort_by_performance(models, task.perf_metric_id)

    warnings: list[str] = []
    rates: dict[str, RateEntry] = {task.perf_metric_id: _perf_rate_entry(ordered, task)}
    for metric_id in task.metric_ids:
        if metric_id == task.perf_metric_id:
            continue
        try:
            if len(ordered) < 2:
                raise EmptyMrsSet("fewer than two models")
            terms = mrs_set(ordered, metric_id, task.perf_metric_id, task.epsilon)
            rates[metric_id] = RateEntry(amrs=amrs(terms), pair_count=len(terms))
        except (EmptyMrsSet, ZeroAmrs) as exc:
            if metric_w.get(metric_id, 0.0) > 0:
                warnings.append(
                    f"metric {metric_id!r}: exchange rate undefined ({exc}); "
                    "excluded from scoring and weights renormalized"
                )

    scoring_w = {
        mid: w for mid, w in metric_w.items() if w > 0 and mid in rates
    }
    if not scoring_w:
        warnings.append(
            f"no weighted metric has a defined exchange rate; "
            f"falling back to performance-only scoring ({task.perf_metric_id!r})"
        )
        scoring_w = {task.perf_metric_id: 1.0}
    else:
        scoring_w = normalize_weights(scoring_w)

    table = ExchangeRateTable(
        perf_metric_id=task.perf_metric_id,
        rates=rates,
        model_ids=tuple(m.model_id for m in ordered),
        computed_at=utc_now(),
    )

    scores = {m.model_id: dynascore(m, scoring_w, table) for m in models}
    if len(models) >= 2:
        zscores = avg_zscore(models, scoring_w)
    else:
        zscores = {m.model_id: 0.0 for m in models}

    ranked = sorted(models, key=lambda m: (-scores[m.model_id], m.model_id))
    rows = tuple(
        LeaderboardRow(
            model_id=m.model_id,
            raw_values=dict(raw_means[m.model_id]),
            dynascore=scores[m.model_id],
            avg_zscore=zscores[m.model_id],
            rank=i + 1,
        )
        for i, m in enumerate(ranked)
    )
    return RankingResult(rows=rows, rates=table, warnings=tuple(warnings))


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()
