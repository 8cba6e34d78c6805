"""Binary classification metrics and per-learner, event-weighted aggregation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple

from .models import EngagementLabel

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


class EmptyConfusionMatrixError(ValueError):
    pass


def _ratio(num: float, den: float) -> float:
    # 0/0 -> 0, the usual ML-library convention
    return num / den if den else 0.0


@dataclass
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def add(self, predicted: EngagementLabel, actual: EngagementLabel) -> None:
        pos_pred = predicted == EngagementLabel.ENGAGED
        pos_true = actual == EngagementLabel.ENGAGED
        if pos_pred and pos_true:
            self.tp += 1
        elif pos_pred:
            self.fp += 1
        elif pos_true:
            self.fn += 1
        else:
            self.tn += 1

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    def to_dict(self) -> dict[str, int]:
        return asdict(self)


class Scores(NamedTuple):
    accuracy: float
    precision: float
    recall: float
    f1: float


def compute(cm: ConfusionMatrix) -> Scores:
    if cm.total < 1:
        raise EmptyConfusionMatrixError("cannot score an empty confusion matrix")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    return Scores(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        f1=_ratio(2 * precision * recall, precision + recall),
    )


@dataclass(frozen=True)
class LearnerMetrics:
    learner_id: str
    event_count: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_confusion(cls, learner_id: str, cm: ConfusionMatrix) -> "LearnerMetrics":
        return cls(learner_id, cm.total, *compute(cm))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AggregateMetrics:
    event_count: int
    learner_count: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return asdict(self)


def weighted_aggregate(per_learner: Iterable[LearnerMetrics]) -> AggregateMetrics:
    """Average each metric over learners, weighting by scored events."""
    rows = sorted(per_learner, key=lambda m: m.learner_id)
    total = sum(m.event_count for m in rows)
    if total == 0:
        raise EmptyConfusionMatrixError("no scored events to aggregate")
    values = {}
    for name in METRIC_NAMES:
        column = [getattr(m, name) for m in rows if m.event_count]
        mean = math.fsum(getattr(m, name) * m.event_count for m in rows) / total
        # rounding can step one ulp outside the inputs' range
        values[name] = min(max(mean, min(column)), max(column))
    return AggregateMetrics(event_count=total, learner_count=len(rows), **values)
