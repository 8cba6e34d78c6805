"""TrueLearn classifiers: Knowledge, Novelty, Interest and the INK ensemble.

Each event is a two-team match. The learner team is the sum of the learner's
beliefs over the event's topics; the content team is the sum of the topic
depths, which are observed exactly. Every team member contributes
performance noise ``beta**2`` on each side.
"""

from __future__ import annotations

import math

from scipy import special

from ..bayes import Gaussian
from ..models import EngagementLabel, EventModel, LearnerModel, StateKind
from . import _factors
from .base import BaseClassifier

SECONDS_PER_HOUR = 3600.0


class _TrueLearnClassifier(BaseClassifier):
    state_kind: StateKind = "knowledge"

    def prior(self) -> Gaussian:
        return Gaussian(self.params.init_mean, self.params.init_variance)

    def _beliefs(self, learner: LearnerModel, event: EventModel) -> list[Gaussian]:
        state = learner.state(self.state_kind)
        prior = self.prior()
        return [state.get(t.kc.id, prior) for t in event.topics]

    def _store(self, learner: LearnerModel, event: EventModel, beliefs: list[Gaussian]) -> None:
        state = learner.state(self.state_kind)
        for topic, belief in zip(event.topics, beliefs):
            state[topic.kc.id] = belief

    def _drifted(self, learner: LearnerModel, event: EventModel) -> list[Gaussian]:
        extra = self.params.tau**2
        beliefs = self._beliefs(learner, event)
        if extra == 0.0:
            return beliefs
        return [Gaussian(g.mean, g.variance + extra) for g in beliefs]


class _SkillClassifier(_TrueLearnClassifier):
    """Learner-skill vs content-depth comparison (Knowledge and Novelty)."""

    def _diff(self, beliefs: list[Gaussian], event: EventModel) -> Gaussian:
        n = len(event.topics)
        content = sum(t.depth for t in event.topics)
        return _factors.difference(
            beliefs, [1.0] * n, -content, 2.0 * n * self.params.beta**2
        )

    def _observe(self, learner, event, outcome, margin=0.0, beliefs=None) -> None:
        beliefs = self._drifted(learner, event) if beliefs is None else beliefs
        n = len(event.topics)
        content = sum(t.depth for t in event.topics)
        posterior = _factors.update(
            beliefs, [1.0] * n, -content, 2.0 * n * self.params.beta**2, outcome, margin
        )
        self._store(learner, event, posterior)


class KnowledgeClassifier(_SkillClassifier):
    """Engagement means the learner's skill beats the content depth."""

    name = "knowledge"

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        return _factors.prob_greater(self._diff(self._beliefs(learner, event), event))

    def _update(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> None:
        outcome = "greater" if label is EngagementLabel.ENGAGED else "less"
        self._observe(learner, event, outcome)


class NoveltyClassifier(_SkillClassifier):
    """Engagement means skill and depth draw: material neither too easy nor too hard."""

    name = "novelty"

    def draw_margin(self, n_topics: int) -> float:
        if self.params.draw_margin is not None:
            return self.params.draw_margin
        # inverse of P(draw) = 2 * Phi(eps / (sqrt(2n) * beta)) - 1
        z = float(special.ndtri((self.params.draw_probability + 1.0) / 2.0))
        return z * math.sqrt(2.0 * n_topics) * self.params.beta

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        diff = self._diff(self._beliefs(learner, event), event)
        return _factors.prob_within(diff, self.draw_margin(len(event.topics)))

    def _update(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> None:
        margin = self.draw_margin(len(event.topics))
        beliefs = self._drifted(learner, event)
        if label is EngagementLabel.ENGAGED:
            outcome = "within"
        else:
            # a miss is "too easy" when the learner is ahead, otherwise "too hard"
            ahead = self._diff(beliefs, event).mean > 0.0
            outcome = "greater" if ahead else "less"
        self._observe(learner, event, outcome, margin, beliefs)


class InterestClassifier(_TrueLearnClassifier):
    """Engagement means presence-weighted average interest clears a fixed level."""

    name = "interest"
    state_kind: StateKind = "interest"

    def _weights(self, event: EventModel) -> list[float]:
        n = len(event.topics)
        return [t.presence / n for t in event.topics]

    def _diff(self, beliefs: list[Gaussian], event: EventModel) -> Gaussian:
        return _factors.difference(
            beliefs,
            self._weights(event),
            -self.params.interest_threshold,
            2.0 * self.params.beta**2,
        )

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        return _factors.prob_greater(self._diff(self._beliefs(learner, event), event))

    def _decayed(self, learner: LearnerModel, event: EventModel) -> list[Gaussian]:
        beliefs = self._beliefs(learner, event)
        if learner.last_event_time is None:
            return beliefs
        hours = max(event.timestamp - learner.last_event_time, 0.0) / SECONDS_PER_HOUR
        extra = self.params.decay_rate * hours * self.params.tau**2
        if extra == 0.0:
            return beliefs
        return [Gaussian(g.mean, g.variance + extra) for g in beliefs]

    def _update(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> None:
        beliefs = self._decayed(learner, event)
        outcome = "greater" if label is EngagementLabel.ENGAGED else "less"
        posterior = _factors.update(
            beliefs,
            self._weights(event),
            -self.params.interest_threshold,
            2.0 * self.params.beta**2,
            outcome,
        )
        self._store(learner, event, posterior)


class INKClassifier(BaseClassifier):
    """Online mixture of the Interest, Novelty and Knowledge predictions.

    Mixture weights live on the learner (``learner.ink_weights``) and follow a
    multiplicative-weights rule on the absolute error of each member. Novelty
    and Knowledge read the same knowledge beliefs, so only Novelty's update is
    applied to them; applying both would count each event twice.
    """

    name = "ink"
    state_kind: StateKind = "knowledge"
    MEMBERS = ("interest", "novelty", "knowledge")

    def _members(self) -> dict[str, BaseClassifier]:
        p = self.params
        return {
            "interest": InterestClassifier(p),
            "novelty": NoveltyClassifier(p),
            "knowledge": KnowledgeClassifier(p),
        }

    def weights(self, learner: LearnerModel) -> dict[str, float]:
        if learner.ink_weights is None:
            return {m: 1.0 / len(self.MEMBERS) for m in self.MEMBERS}
        return dict(learner.ink_weights)

    def member_probabilities(self, learner: LearnerModel, event: EventModel) -> dict[str, float]:
        return {m: c.predict_proba(learner, event) for m, c in self._members().items()}

    def predict_proba(self, learner: LearnerModel, event: EventModel) -> float:
        w = self.weights(learner)
        probs = self.member_probabilities(learner, event)
        p = sum(w[m] * probs[m] for m in self.MEMBERS)
        return min(max(p, 0.0), 1.0)

    def _update(self, learner: LearnerModel, event: EventModel, label: EngagementLabel) -> None:
        members = self._members()
        probs = {m: c.predict_proba(learner, event) for m, c in members.items()}
        y = 1.0 if label is EngagementLabel.ENGAGED else 0.0
        eta = self.params.ink_learning_rate
        w = self.weights(learner)
        raw = {m: w[m] * math.exp(-eta * abs(probs[m] - y)) for m in self.MEMBERS}
        total = math.fsum(raw.values())
        learner.ink_weights = {m: raw[m] / total for m in self.MEMBERS}
        members["interest"]._update(learner, event, label)
        members["novelty"]._update(learner, event, label)
