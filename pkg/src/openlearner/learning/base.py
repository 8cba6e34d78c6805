from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar, Protocol, runtime_checkable

from ..models import EngagementLabel, EventModel, LearnerModel, StateKind
from .params import ClassifierParams


class OutOfOrderEventError(ValueError):
    """An event is older than the last event already fitted for the learner."""


@dataclass(frozen=True)
class Prediction:
    probability: float
    label: EngagementLabel


@runtime_checkable
class EngagementClassifier(Protocol):
    """What the harness needs from a classifier."""

    name: str
    state_kind: StateKind | None

    def fit(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> LearnerModel: ...

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float: ...

    def predict(self, learner: LearnerModel, event: EventModel) -> EngagementLabel: ...


class BaseClassifier:
    """Shared fit/predict plumbing.

    Subclasses implement ``predict_proba`` and ``_update``; ``fit`` takes care
    of validation, topic titles and the engagement counters.
    """

    name: ClassVar[str] = "base"
    state_kind: ClassVar[StateKind | None] = None

    def __init__(self, params: ClassifierParams | None = None, **overrides: Any) -> None:
        params = params or ClassifierParams()
        self.params = params.replace(**overrides) if overrides else params

    @property
    def params(self) -> ClassifierParams:
        return self._params

    @params.setter
    def params(self, value: ClassifierParams) -> None:
        if not isinstance(value, ClassifierParams):
            raise TypeError(f"params must be ClassifierParams, got {type(value).__name__}")
        self._params = value

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._params!r})"

    def fit(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> LearnerModel:
        if not event.topics:
            raise ValueError("cannot fit an event without topics")
        if learner.last_event_time is not None and event.timestamp < learner.last_event_time:
            raise OutOfOrderEventError(
                f"event at {event.timestamp} precedes last fitted event at {learner.last_event_time}"
            )
        label = EngagementLabel(label)
        self._update(learner, event, label)
        learner.remember_topics(event)
        learner.record(event, label)
        return learner

    def _update(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> None:
        raise NotImplementedError

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        raise NotImplementedError

    def predict(self, learner: LearnerModel, event: EventModel) -> EngagementLabel:
        return self.predict_with_probability(learner, event).label

    def predict_with_probability(self, learner: LearnerModel, event: EventModel) -> Prediction:
        p = self.predict_proba(learner, event)
        engaged = p >= self._params.threshold
        return Prediction(p, EngagementLabel.ENGAGED if engaged else EngagementLabel.NOT_ENGAGED)
