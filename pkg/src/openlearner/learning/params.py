from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping


class ParameterError(ValueError):
    """A hyperparameter failed its type or range check."""


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class ClassifierParams:
    """Hyperparameters shared by every classifier.

    Instances are immutable; use :meth:`replace` to derive a modified copy,
    which goes through the same validation as construction.

    ``draw_margin`` overrides the margin that would otherwise be derived from
    ``draw_probability``. ``interest_threshold`` is the level the averaged
    interest has to clear, and ``ink_learning_rate`` is the multiplicative
    weights step of the INK ensemble.
    """

    init_mean: float = 0.0
    init_variance: float = 0.5
    beta: float = 0.5
    tau: float = 0.0
    draw_probability: float = 0.5
    draw_margin: float | None = None
    decay_rate: float = 0.0
    threshold: float = 0.5
    interest_threshold: float = 0.5
    ink_learning_rate: float = 0.5

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "draw_margin" and value is None:
                continue
            if not _is_real(value):
                raise ParameterError(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        if self.init_variance <= 0:
            raise ParameterError(f"init_variance must be > 0, got {self.init_variance}")
        if self.beta <= 0:
            raise ParameterError(f"beta must be > 0, got {self.beta}")
        if self.tau < 0:
            raise ParameterError(f"tau must be >= 0, got {self.tau}")
        if not 0.0 < self.draw_probability < 1.0:
            raise ParameterError(
                f"draw_probability must lie in (0, 1), got {self.draw_probability}"
            )
        if self.draw_margin is not None and self.draw_margin < 0:
            raise ParameterError(f"draw_margin must be >= 0, got {self.draw_margin}")
        if self.decay_rate < 0:
            raise ParameterError(f"decay_rate must be >= 0, got {self.decay_rate}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ParameterError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.ink_learning_rate < 0:
            raise ParameterError(
                f"ink_learning_rate must be >= 0, got {self.ink_learning_rate}"
            )

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_dict(cls, values: Mapping[str, Any]) -> "ClassifierParams":
        unknown = sorted(set(values) - set(cls.field_names()))
        if unknown:
            raise ParameterError(
                f"unknown hyperparameter(s) {unknown}; expected a subset of {list(cls.field_names())}"
            )
        return cls(**values)

    def replace(self, **changes: Any) -> "ClassifierParams":
        return self.from_dict({**self.to_dict(), **changes})

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)
