"""Online Bayesian learner models for engagement prediction on educational video.

Modules:

* :mod:`openlearner.bayes` - Gaussian beliefs and truncated-Gaussian updates
* :mod:`openlearner.models` - learner, event and history data structures
* :mod:`openlearner.learning` - baseline and TrueLearn classifiers
* :mod:`openlearner.datasets` - PEEK download, verification and parsing
* :mod:`openlearner.metrics` - confusion-matrix metrics and weighted aggregation
* :mod:`openlearner.harness` - predict-then-fit evaluation and grid sweeps
* :mod:`openlearner.viz` - SVG/HTML learner-state charts
"""

from .bayes import Gaussian
from .learning import ClassifierParams, make_classifier
from .models import EngagementLabel, EventModel, EventTopic, KnowledgeComponent, LearnerModel

__version__ = "0.1.0"

__all__ = [
    "ClassifierParams",
    "EngagementLabel",
    "EventModel",
    "EventTopic",
    "Gaussian",
    "KnowledgeComponent",
    "LearnerModel",
    "make_classifier",
]
