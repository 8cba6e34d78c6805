"""Online engagement classifiers with a shared fit / predict / predict_proba API."""

from __future__ import annotations

from typing import Any

from .base import BaseClassifier, EngagementClassifier, OutOfOrderEventError, Prediction
from .baselines import EngageClassifier, MajorityClassifier, PersistenceClassifier
from .params import ClassifierParams, ParameterError
from .truelearn import INKClassifier, InterestClassifier, KnowledgeClassifier, NoveltyClassifier

CLASSIFIERS: dict[str, type[BaseClassifier]] = {
    cls.name: cls
    for cls in (
        EngageClassifier,
        MajorityClassifier,
        PersistenceClassifier,
        InterestClassifier,
        NoveltyClassifier,
        KnowledgeClassifier,
        INKClassifier,
    )
}


def make_classifier(name: str, params: ClassifierParams | dict[str, Any] | None = None) -> BaseClassifier:
    """Build a classifier by its registry name."""
    try:
        cls = CLASSIFIERS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(CLASSIFIERS)}") from None
    if isinstance(params, dict):
        params = ClassifierParams.from_dict(params)
    return cls(params)


__all__ = [
    "CLASSIFIERS",
    "BaseClassifier",
    "ClassifierParams",
    "EngageClassifier",
    "EngagementClassifier",
    "INKClassifier",
    "InterestClassifier",
    "KnowledgeClassifier",
    "MajorityClassifier",
    "NoveltyClassifier",
    "OutOfOrderEventError",
    "ParameterError",
    "PersistenceClassifier",
    "Prediction",
    "make_classifier",
]
