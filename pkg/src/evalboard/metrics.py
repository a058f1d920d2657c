"""Task performance metrics behind an extensible registry.

Classification accuracy and macro-F1 plus token-overlap span F1 for
extractive QA.  New metrics register under an id and become scoreable
without touching the ranking code.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .errors import EmptyDataset, UidMismatch, UnknownLabel, UnknownMetric, ValidationError


@dataclass(frozen=True)
class Prediction:
    """One model output: a class label or an answer string, never both."""

    uid: str
    label: str | None = None
    answer_text: str | None = None

    def __post_init__(self):
        if (self.label is None) == (self.answer_text is None):
            raise ValidationError(
                f"prediction {self.uid!r} must set exactly one of label / answer_text"
            )

    @property
    def payload(self) -> str:
        return self.label if self.label is not None else self.answer_text  # type: ignore[return-value]

    def to_dict(self) -> dict:
        doc: dict = {"uid": self.uid}
        if self.label is not None:
            doc["label"] = self.label
        else:
            doc["answer_text"] = self.answer_text
        return doc


@dataclass(frozen=True)
class GoldExample:
    """One dataset example: free-form input fields plus the gold answer
    (a label for classification, a list of acceptable strings for QA)."""

    uid: str
    input: dict = field(default_factory=dict)
    gold: str | tuple[str, ...] = ""

    def __post_init__(self):
        if isinstance(self.gold, list):
            object.__setattr__(self, "gold", tuple(self.gold))
        if not self.gold:
            raise ValidationError(f"example {self.uid!r} has an empty gold")

    @property
    def gold_answers(self) -> tuple[str, ...]:
        return self.gold if isinstance(self.gold, tuple) else (self.gold,)

    def to_dict(self) -> dict:
        gold = list(self.gold) if isinstance(self.gold, tuple) else self.gold
        return {"uid": self.uid, "input": dict(self.input), "gold": gold}

    @classmethod
    def from_dict(cls, doc: dict) -> "GoldExample":
        try:
            return cls(uid=doc["uid"], input=doc.get("input", {}), gold=doc["gold"])
        except KeyError as exc:
            raise ValidationError(f"example missing field {exc}") from exc


def _check_uids(preds: list[Prediction], golds: list[GoldExample]) -> None:
    if not golds:
        raise EmptyDataset("no gold examples")
    pred_uids = {p.uid for p in preds}
    gold_uids = {g.uid for g in golds}
    if pred_uids != gold_uids:
        offender = sorted(pred_uids.symmetric_difference(gold_uids))[0]
        raise UidMismatch(f"prediction/gold uid sets differ, first offender: {offender!r}")


def accuracy(preds: list[Prediction], golds: list[GoldExample]) -> float:
    """Percentage of exact label matches, in [0, 100]."""
    _check_uids(preds, golds)
    by_uid = {p.uid: p for p in preds}
    hits = sum(1 for g in golds if by_uid[g.uid].label == g.gold)
    return 100.0 * hits / len(golds)


def macro_f1(preds: list[Prediction], golds: list[GoldExample], label_set: list[str]) -> float:
    """Mean of per-label F1 over ``label_set``, in [0, 100].

    A label's F1 is zero when its precision and recall are both zero.
    Labels outside ``label_set`` (predicted or gold) raise UnknownLabel.
    """
    _check_uids(preds, golds)
    if not label_set:
        raise ValidationError("label_set must not be empty")
    allowed = set(label_set)
    by_uid = {p.uid: p for p in preds}
    pairs = [(by_uid[g.uid].label, g.gold) for g in golds]
    for pred_label, gold_label in pairs:
        for label in (pred_label, gold_label):
            if label not in allowed:
                raise UnknownLabel(f"label {label!r} not in label set {sorted(allowed)}")
    f1_values = []
    for label in label_set:
        tp = sum(1 for p, g in pairs if p == label and g == label)
        fp = sum(1 for p, g in pairs if p == label and g != label)
        fn = sum(1 for p, g in pairs if p != label and g == label)
        denom = 2 * tp + fp + fn
        f1_values.append(2 * tp / denom if denom else 0.0)
    return 100.0 * sum(f1_values) / len(f1_values)


_ARTICLES = re.compile(r"\b(a|an|the)\b")


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, drop articles, collapse whitespace."""
    text = text.lower()
    text = "".join(ch for ch in text if ch not in string.punctuation)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def span_f1(pred_answer: str, gold_answers: list[str] | tuple[str, ...]) -> float:
    """Best token-overlap F1 of the prediction against any gold, in [0, 1].

    Both sides are normalized first.  If either side normalizes to nothing,
    the score is 1.0 when both do and 0.0 otherwise.
    """
    if not gold_answers:
        raise ValidationError("gold_answers must not be empty")
    pred_tokens = normalize_answer(pred_answer).split()
    best = 0.0
    for gold in gold_answers:
        gold_tokens = normalize_answer(gold).split()
        if not pred_tokens or not gold_tokens:
            score = float(pred_tokens == gold_tokens)
        else:
            common = Counter(pred_tokens) & Counter(gold_tokens)
            same = sum(common.values())
            if same == 0:
                score = 0.0
            else:
                precision = same / len(pred_tokens)
                recall = same / len(gold_tokens)
                score = 2 * precision * recall / (precision + recall)
        best = max(best, score)
    return best


# --- registry ----------------------------------------------------------------

MetricFn = Callable[[list[Prediction], list[GoldExample]], float]

_REGISTRY: dict[str, MetricFn] = {}


def register_metric(metric_id: str, fn: MetricFn) -> None:
    """Make a performance metric scoreable under ``metric_id``."""
    _REGISTRY[metric_id] = fn


def get_metric(metric_id: str) -> MetricFn:
    if metric_id not in _REGISTRY:
        raise UnknownMetric(f"no registered metric {metric_id!r}")
    return _REGISTRY[metric_id]


def registered_metrics() -> list[str]:
    return sorted(_REGISTRY)


def _macro_f1_auto(preds: list[Prediction], golds: list[GoldExample]) -> float:
    # Label set = everything seen on either side, so off-vocabulary
    # predictions count against the score instead of erroring.
    labels = sorted(
        {g.gold for g in golds if isinstance(g.gold, str)}
        | {p.label for p in preds if p.label is not None}
    )
    return macro_f1(preds, golds, labels)


def _span_f1_dataset(preds: list[Prediction], golds: list[GoldExample]) -> float:
    _check_uids(preds, golds)
    by_uid = {p.uid: p for p in preds}
    total = sum(span_f1(by_uid[g.uid].answer_text or "", g.gold_answers) for g in golds)
    return 100.0 * total / len(golds)


register_metric("accuracy", accuracy)
register_metric("macro_f1", _macro_f1_auto)
register_metric("span_f1", _span_f1_dataset)
