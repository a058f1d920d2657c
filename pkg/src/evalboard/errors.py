"""Domain error hierarchy.

Every error the engine raises on purpose derives from :class:`BoardError`,
so callers (CLI, HTTP layer) can map domain failures to exit codes and
status codes without catching bare exceptions.
"""

from __future__ import annotations


class BoardError(Exception):
    """Base class for all domain errors raised by this package."""


# --- weights ---------------------------------------------------------------

class EmptyWeights(BoardError):
    """A weight map with no keys was supplied."""


class ZeroTotal(BoardError):
    """All supplied weights are zero; nothing can be normalized."""


class NegativeWeight(BoardError):
    """Weights must be nonnegative."""


class UnknownMetric(BoardError):
    """A metric id is not part of the task's catalog."""


class UnknownDataset(BoardError):
    """A dataset id is not part of the task's catalog."""


# --- goods transformation / aggregation ------------------------------------

class MissingCap(BoardError):
    """A minimize-direction metric has no resolvable cap."""


class CapExceeded(BoardError):
    """A minimize-direction value exceeds its cap; goods must stay >= 0."""


class MissingCell(BoardError):
    """A required (model, dataset, metric) record is absent."""

    def __init__(self, model_id: str, dataset_id: str, metric_id: str):
        self.model_id = model_id
        self.dataset_id = dataset_id
        self.metric_id = metric_id
        super().__init__(
            f"missing record for model={model_id!r} dataset={dataset_id!r} metric={metric_id!r}"
        )


# --- scoring ----------------------------------------------------------------

class TooFewModels(BoardError):
    """The operation needs at least two models."""


class EmptyMrsSet(BoardError):
    """Every consecutive pair fell under the epsilon threshold: all models
    perform effectively the same, so no exchange rate exists."""


class ZeroAmrs(BoardError):
    """The exchange rate averaged to zero: every model holds the same value
    for this metric, so its converted value is undefined."""


class MissingRate(BoardError):
    """No exchange rate is available for a metric with nonzero weight."""


class NoModels(BoardError):
    """No model has a complete set of records for this task."""


# --- metrics ----------------------------------------------------------------

class UidMismatch(BoardError):
    """Prediction uids and gold uids do not line up."""


class EmptyDataset(BoardError):
    """The operation is undefined on an empty dataset."""


class UnknownLabel(BoardError):
    """A label was seen that is not in the declared label set."""


# --- runner -----------------------------------------------------------------

class ModelCrashed(BoardError):
    """The model process exited unexpectedly."""

    def __init__(self, message: str, exit_status: int | None = None):
        self.exit_status = exit_status
        super().__init__(message)


class ProtocolViolation(BoardError):
    """The model broke the line protocol."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"protocol violation at model output line {line_no}: {reason}")


class ModelTimeout(BoardError):
    """The model did not answer within the allowed time."""


class MemoryLimitExceeded(BoardError):
    """The model process crossed the memory cap during a run."""


class ProcessGone(BoardError):
    """The process vanished before a single memory sample was taken."""


# --- store ------------------------------------------------------------------

class ValidationError(BoardError):
    """A record or document failed validation."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message)


class ParseError(BoardError):
    """A stored line could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        super().__init__(message)
