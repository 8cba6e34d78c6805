"""Learner state and event data structures.

Nothing here knows about the learning algorithms; a :class:`LearnerModel` is a
plain container that any classifier (or an external model) can fill in.
"""

from __future__ import annotations

import copy
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, NamedTuple

from .bayes import Gaussian

__all__ = [
    "EngagementLabel",
    "EventModel",
    "EventTopic",
    "HistoryRow",
    "KnowledgeComponent",
    "LearnerHistory",
    "LearnerModel",
    "SnapshotEntry",
    "StateKind",
    "make_event",
    "snapshot",
]

MAX_TOPICS = 5

StateKind = Literal["knowledge", "interest"]


class EngagementLabel(enum.IntEnum):
    ENGAGED = 1
    NOT_ENGAGED = -1

    @classmethod
    def from_binary(cls, value: int | bool) -> "EngagementLabel":
        """Map a 0/1 dataset label onto the {-1, 1} encoding."""
        if value in (1, True):
            return cls.ENGAGED
        if value in (0, False):
            return cls.NOT_ENGAGED
        raise ValueError(f"engagement label must be 0 or 1, got {value!r}")

    @property
    def binary(self) -> int:
        return 1 if self is EngagementLabel.ENGAGED else 0


@dataclass(frozen=True)
class KnowledgeComponent:
    id: int
    title: str
    description: str | None = None

    def __post_init__(self) -> None:
        if not self.title:
            raise ValueError(f"knowledge component {self.id} needs a non-empty title")


@dataclass(frozen=True)
class EventTopic:
    kc: KnowledgeComponent
    presence: float = 1.0
    depth: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.presence) and 0.0 <= self.presence <= 1.0):
            raise ValueError(f"presence must lie in [0, 1], got {self.presence}")
        if not (math.isfinite(self.depth) and self.depth >= 0.0):
            raise ValueError(f"depth must be finite and >= 0, got {self.depth}")


@dataclass(frozen=True)
class EventModel:
    """One watch event on a resource fragment."""

    resource_id: str
    part: int
    timestamp: float
    topics: tuple[EventTopic, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "topics", tuple(self.topics))
        if not self.topics:
            raise ValueError("an event needs at least one topic")
        if len(self.topics) > MAX_TOPICS:
            raise ValueError(f"an event carries at most {MAX_TOPICS} topics")
        ids = [t.kc.id for t in self.topics]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate topic ids in event: {ids}")
        if self.part < 1:
            raise ValueError(f"part index must be >= 1, got {self.part}")
        if not math.isfinite(self.timestamp):
            raise ValueError("timestamp must be finite")


class SnapshotEntry(NamedTuple):
    title: str
    mean: float
    variance: float
    kc_id: int


@dataclass
class LearnerModel:
    """Per-learner beliefs over knowledge components.

    ``knowledge`` and ``interest`` only ever contain KCs the learner has been
    observed with. ``ink_weights`` holds the per-learner ensemble mixture when
    the INK classifier is in use.
    """

    learner_id: str
    knowledge: dict[int, Gaussian] = field(default_factory=dict)
    interest: dict[int, Gaussian] = field(default_factory=dict)
    titles: dict[int, str] = field(default_factory=dict)
    engaged_count: int = 0
    non_engaged_count: int = 0
    last_event_time: float | None = None
    last_label: EngagementLabel | None = None
    ink_weights: dict[str, float] | None = None

    @property
    def event_count(self) -> int:
        return self.engaged_count + self.non_engaged_count

    def state(self, kind: StateKind) -> dict[int, Gaussian]:
        if kind == "knowledge":
            return self.knowledge
        if kind == "interest":
            return self.interest
        raise ValueError(f"unknown state kind {kind!r}")

    def remember_topics(self, event: EventModel) -> None:
        for topic in event.topics:
            self.titles.setdefault(topic.kc.id, topic.kc.title)

    def record(self, event: EventModel, label: EngagementLabel) -> None:
        """Advance counters and clock after an update."""
        if label is EngagementLabel.ENGAGED:
            self.engaged_count += 1
        else:
            self.non_engaged_count += 1
        self.last_label = EngagementLabel(label)
        self.last_event_time = event.timestamp

    def copy(self) -> "LearnerModel":
        return copy.deepcopy(self)

    # persistence -------------------------------------------------------

    def _entries(self, kind: StateKind) -> list[dict]:
        return [
            {
                "kc_id": kc_id,
                "title": self.titles.get(kc_id, str(kc_id)),
                "mean": g.mean,
                "variance": g.variance,
            }
            for kc_id, g in sorted(self.state(kind).items())
        ]

    def to_dict(self) -> dict:
        doc = {
            "learner_id": self.learner_id,
            "knowledge": self._entries("knowledge"),
            "interest": self._entries("interest"),
            "engaged_count": self.engaged_count,
            "non_engaged_count": self.non_engaged_count,
            "last_event_time": self.last_event_time,
            "last_label": None if self.last_label is None else int(self.last_label),
        }
        if self.ink_weights is not None:
            doc["ink_weights"] = dict(self.ink_weights)
        return doc

    def to_json(self) -> str:
        # repr-based float output round-trips bit-exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "LearnerModel":
        learner = cls(str(doc["learner_id"]))
        for kind in ("knowledge", "interest"):
            target = learner.state(kind)
            for entry in doc.get(kind, []):
                kc_id = int(entry["kc_id"])
                belief = Gaussian(float(entry["mean"]), float(entry["variance"]))
                if not belief.is_proper:
                    raise ValueError(f"improper belief stored for KC {kc_id}")
                target[kc_id] = belief
                learner.titles.setdefault(kc_id, str(entry.get("title") or kc_id))
        learner.engaged_count = int(doc.get("engaged_count", 0))
        learner.non_engaged_count = int(doc.get("non_engaged_count", 0))
        if learner.engaged_count < 0 or learner.non_engaged_count < 0:
            raise ValueError("engagement counters must be non-negative")
        last = doc.get("last_event_time")
        learner.last_event_time = None if last is None else float(last)
        label = doc.get("last_label")
        learner.last_label = None if label is None else EngagementLabel(int(label))
        weights = doc.get("ink_weights")
        learner.ink_weights = None if weights is None else {k: float(v) for k, v in weights.items()}
        return learner

    @classmethod
    def from_json(cls, text: str) -> "LearnerModel":
        return cls.from_dict(json.loads(text))


def snapshot(
    learner: LearnerModel, state_kind: StateKind = "knowledge", top_k: int = 15
) -> list[SnapshotEntry]:
    """Top ``top_k`` beliefs by mean (descending, ties by KC id)."""
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    state = learner.state(state_kind)
    ranked = sorted(state.items(), key=lambda item: (-item[1].mean, item[0]))
    return [
        SnapshotEntry(learner.titles.get(kc_id, str(kc_id)), g.mean, g.variance, kc_id)
        for kc_id, g in ranked[:top_k]
    ]


class HistoryRow(NamedTuple):
    event_index: int
    timestamp: float
    kc_id: int
    mean: float
    variance: float


@dataclass
class LearnerHistory:
    """Belief trajectory of one learner, one row per (event, updated KC)."""

    learner_id: str = ""
    state_kind: StateKind = "knowledge"
    rows: list[HistoryRow] = field(default_factory=list)
    titles: dict[int, str] = field(default_factory=dict)

    def append(self, event_index: int, timestamp: float, kc_id: int, belief: Gaussian) -> None:
        self.rows.append(HistoryRow(event_index, timestamp, kc_id, belief.mean, belief.variance))

    def extend_from(self, event_index: int, event: EventModel, state: dict[int, Gaussian]) -> None:
        for topic in event.topics:
            kc_id = topic.kc.id
            if kc_id in state:
                self.titles.setdefault(kc_id, topic.kc.title)
                self.append(event_index, event.timestamp, kc_id, state[kc_id])

    def series(self) -> dict[int, list[HistoryRow]]:
        out: dict[int, list[HistoryRow]] = {}
        for row in self.rows:
            out.setdefault(row.kc_id, []).append(row)
        return out

    def final_snapshot(self, top_k: int = 15) -> list[SnapshotEntry]:
        last = {kc_id: rows[-1] for kc_id, rows in self.series().items()}
        ranked = sorted(last.items(), key=lambda item: (-item[1].mean, item[0]))
        return [
            SnapshotEntry(self.titles.get(kc_id, str(kc_id)), row.mean, row.variance, kc_id)
            for kc_id, row in ranked[:top_k]
        ]

    def to_dict(self) -> dict:
        return {
            "learner_id": self.learner_id,
            "state_kind": self.state_kind,
            "titles": {str(k): v for k, v in sorted(self.titles.items())},
            "snapshots": [list(row) for row in self.rows],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LearnerHistory":
        rows = [
            HistoryRow(int(r[0]), float(r[1]), int(r[2]), float(r[3]), float(r[4]))
            for r in doc.get("snapshots", [])
        ]
        titles = {int(k): v for k, v in doc.get("titles", {}).items()}
        return cls(str(doc.get("learner_id", "")), doc.get("state_kind", "knowledge"), rows, titles)


def make_event(
    resource_id: str,
    timestamp: float,
    topics: Iterable[tuple[int, float] | tuple[int, float, float]],
    *,
    part: int = 1,
    titles: dict[int, str] | None = None,
) -> EventModel:
    """Convenience constructor: ``topics`` are ``(kc_id, depth)`` or ``(kc_id, depth, presence)``."""
    titles = titles or {}
    built = []
    for item in topics:
        kc_id, depth = item[0], item[1]
        presence = item[2] if len(item) > 2 else 1.0
        kc = KnowledgeComponent(int(kc_id), titles.get(int(kc_id), str(kc_id)))
        built.append(EventTopic(kc, presence=presence, depth=depth))
    return EventModel(resource_id, part, timestamp, tuple(built))
