"""Reference classifiers that ignore topic content."""

from __future__ import annotations

from ..models import EngagementLabel, EventModel, LearnerModel
from .base import BaseClassifier, Prediction


class _CountingClassifier(BaseClassifier):
    def _update(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> None:
        # the counters and last label are all the state a baseline needs
        pass

    def _engaged(self, learner: LearnerModel) -> bool:
        raise NotImplementedError

    def predict_with_probability(self, learner: LearnerModel, event: EventModel) -> Prediction:
        label = EngagementLabel.ENGAGED if self._engaged(learner) else EngagementLabel.NOT_ENGAGED
        return Prediction(self.predict_proba(learner, event), label)


class EngageClassifier(_CountingClassifier):
    """Always predicts engagement."""

    name = "engage"

    def _engaged(self, learner: LearnerModel) -> bool:
        return True

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        return 1.0


class MajorityClassifier(_CountingClassifier):
    """Predicts the learner's most frequent label so far; ties go to engaged."""

    name = "majority"

    def _engaged(self, learner: LearnerModel) -> bool:
        return learner.engaged_count >= learner.non_engaged_count

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        total = learner.event_count
        if total == 0:
            return 0.5
        return learner.engaged_count / total


class PersistenceClassifier(_CountingClassifier):
    """Repeats the learner's previous label (engaged before any history)."""

    name = "persistence"

    def _engaged(self, learner: LearnerModel) -> bool:
        return learner.last_label is not EngagementLabel.NOT_ENGAGED

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        return 1.0 if self._engaged(learner) else 0.0
