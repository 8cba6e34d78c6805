"""Predict-then-fit evaluation, grid sweeps and evaluation reports."""

from __future__ import annotations

import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Sequence

from .datasets import Stream, Streams, filter_min_events
from .learning import CLASSIFIERS, BaseClassifier, ClassifierParams, ParameterError, make_classifier
from .metrics import AggregateMetrics, ConfusionMatrix, LearnerMetrics, weighted_aggregate
from .models import LearnerHistory, LearnerModel

log = logging.getLogger(__name__)


class EvaluationError(RuntimeError):
    """A classifier failed on a specific event of a learner's stream."""

    def __init__(self, learner_id: str, event_index: int, cause: BaseException) -> None:
        super().__init__(f"learner {learner_id!r}, event {event_index}: {cause}")
        self.learner_id = learner_id
        self.event_index = event_index


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """What to run: a model, fixed params, an optional grid, protocol knobs.

    ``dataset`` is passed through untouched for the command line to resolve
    (cache dir, manifest, column mapping).
    """

    model: str
    params: dict[str, Any] = field(default_factory=dict)
    grid: dict[str, list] = field(default_factory=dict)
    warm_up_events: int = 0
    min_events: int | None = None
    dataset: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.model not in CLASSIFIERS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {sorted(CLASSIFIERS)}")
        if self.warm_up_events < 0:
            raise ConfigError("warm_up_events must be >= 0")
        if self.min_events is not None and self.min_events < 0:
            raise ConfigError("min_events must be >= 0")
        names = set(ClassifierParams.field_names())
        for key, values in self.grid.items():
            if key not in names:
                raise ConfigError(f"grid key {key!r} is not a hyperparameter")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"grid entry {key!r} must be a non-empty list")
        try:
            ClassifierParams.from_dict(self.params)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        known = {"model", "params", "grid", "warm_up_events", "min_events", "dataset"}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s) {unknown}")
        return cls(**doc)

    @classmethod
    def load(cls, path: str | os.PathLike, **overrides: Any) -> "ExperimentConfig":
        doc = json.loads(Path(path).read_text())
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(doc)


class SequentialResult(NamedTuple):
    confusion: ConfusionMatrix
    history: LearnerHistory
    learner: LearnerModel


def run_sequential(
    classifier: BaseClassifier,
    stream: Stream,
    warm_up_events: int = 0,
    learner: LearnerModel | None = None,
    learner_id: str = "",
) -> SequentialResult:
    """Score each event with the model fitted on the events before it, then fit it.

    Events with index below ``warm_up_events`` are fitted but not scored.
    """
    learner = learner if learner is not None else LearnerModel(learner_id)
    kind = classifier.state_kind
    history = LearnerHistory(learner.learner_id, kind or "knowledge")
    cm = ConfusionMatrix()
    for i, (event, label) in enumerate(stream):
        try:
            if i >= warm_up_events:
                cm.add(classifier.predict(learner, event), label)
            classifier.fit(learner, event, label)
        except Exception as exc:
            raise EvaluationError(learner.learner_id, i, exc) from exc
        if kind is not None:
            history.extend_from(i, event, learner.state(kind))
    return SequentialResult(cm, history, learner)


@dataclass
class LearnerResult:
    learner_id: str
    confusion: ConfusionMatrix
    history: LearnerHistory
    learner: LearnerModel


def _run_one(args: tuple[BaseClassifier, str, Stream, int]) -> LearnerResult:
    classifier, learner_id, stream, warm_up = args
    cm, history, learner = run_sequential(classifier, stream, warm_up, learner_id=learner_id)
    return LearnerResult(learner_id, cm, history, learner)


def run_learners(
    classifier: BaseClassifier, streams: Streams, warm_up_events: int = 0, jobs: int = 1
) -> list[LearnerResult]:
    """Sequential runs for every learner, each from a fresh state, sorted by learner id."""
    tasks = [(classifier, lid, streams[lid], warm_up_events) for lid in sorted(streams)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_run_one(t) for t in tasks]
    return sorted(results, key=lambda r: r.learner_id)


def score(results: Sequence[LearnerResult]) -> tuple[list[LearnerMetrics], AggregateMetrics | None]:
    per_learner = [
        LearnerMetrics.from_confusion(r.learner_id, r.confusion)
        for r in results
        if r.confusion.total > 0
    ]
    aggregate = weighted_aggregate(per_learner) if per_learner else None
    return per_learner, aggregate


# -- sweep -----------------------------------------------------------------


def _value_key(value: Any) -> tuple:
    return (value is not None, value if value is not None else 0)


def parameter_grid(grid: Mapping[str, Sequence[Any]]) -> list[dict[str, Any]]:
    """All grid points in lexicographic order: keys sorted by name, values ascending."""
    keys = sorted(grid)
    axes = [sorted(dict.fromkeys(grid[k]), key=_value_key) for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*axes)]


@dataclass
class SweepResult:
    best_params: dict[str, Any]
    best_f1: float
    scores: list[tuple[dict[str, Any], float]]

    def to_dict(self) -> dict:
        return {
            "best_params": self.best_params,
            "best_f1": self.best_f1,
            "scores": [{"params": p, "f1": f} for p, f in self.scores],
        }


def sweep(config: ExperimentConfig, train_streams: Streams, jobs: int = 1) -> SweepResult:
    """Exhaustive grid search on event-weighted F1; ties keep the earlier point."""
    streams = filter_min_events(train_streams, config.min_events)
    points = parameter_grid(config.grid) if config.grid else [{}]
    scores = []
    best: tuple[dict[str, Any], float] | None = None
    for point in points:
        params = {**config.params, **point}
        classifier = make_classifier(config.model, ClassifierParams.from_dict(params))
        _, aggregate = score(run_learners(classifier, streams, config.warm_up_events, jobs))
        f1 = aggregate.f1 if aggregate is not None else 0.0
        log.info("sweep %s %s -> f1 %.4f", config.model, point, f1)
        scores.append((params, f1))
        if best is None or f1 > best[1]:
            best = (params, f1)
    assert best is not None
    return SweepResult(best[0], best[1], scores)


# -- evaluation ------------------------------------------------------------


@dataclass
class EvalReport:
    model: str
    params: dict[str, Any]
    aggregate: AggregateMetrics | None
    per_learner: list[LearnerMetrics]
    best_params: dict[str, Any]
    warm_up_events: int
    wall_time_seconds: float | None = None
    min_events: int | None = None
    notes: list[str] = field(default_factory=list)
    results: list[LearnerResult] = field(default_factory=list, repr=False, compare=False)

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "model": self.model,
            "params": self.params,
            "aggregate": None if self.aggregate is None else self.aggregate.to_dict(),
            "per_learner": [m.to_dict() for m in self.per_learner],
            "best_params": self.best_params,
            "warm_up_events": self.warm_up_events,
            "min_events": self.min_events,
            "wall_time_seconds": self.wall_time_seconds if timing else None,
            "notes": list(self.notes),
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2) + "\n"


def evaluate(
    config: ExperimentConfig,
    best_params: Mapping[str, Any],
    test_streams: Streams,
    jobs: int = 1,
) -> EvalReport:
    """Fresh learner states, one sequential run per test learner, weighted aggregate."""
    start = time.perf_counter()
    params = ClassifierParams.from_dict({**config.params, **best_params})
    classifier = make_classifier(config.model, params)
    streams = filter_min_events(test_streams, config.min_events)
    results = run_learners(classifier, streams, config.warm_up_events, jobs)
    per_learner, aggregate = score(results)
    return EvalReport(
        model=config.model,
        params=params.to_dict(),
        aggregate=aggregate,
        per_learner=per_learner,
        best_params=dict(best_params),
        warm_up_events=config.warm_up_events,
        wall_time_seconds=round(time.perf_counter() - start, 3),
        min_events=config.min_events,
        results=results,
    )
