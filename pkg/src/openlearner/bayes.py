"""Gaussian beliefs and truncated-Gaussian moment matching.

This is the small expectation-propagation kernel shared by every TrueSkill
style classifier in :mod:`openlearner.learning`. Products and quotients are
done in precision space, so the uninformative belief (infinite variance) is
just precision zero and never produces ``inf - inf`` arithmetic.

Tail ratios ``pdf/cdf`` go through ``log_ndtr`` / ``erfcx`` so the correction
functions stay accurate far into the tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from scipy import special

__all__ = [
    "Gaussian",
    "ImpossibleObservationError",
    "UNINFORMATIVE",
    "cdf",
    "divide",
    "multiply",
    "pdf",
    "truncate_above",
    "v_greater",
    "v_within",
    "w_greater",
    "w_within",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# survival probability below which an observation is treated as impossible
_LOG_MIN_SURVIVAL = math.log(1e-300)

Mode = Literal["greater", "within"]


class ImpossibleObservationError(ArithmeticError):
    """The conditioning event has (numerically) zero probability under the prior."""


@dataclass(frozen=True)
class Gaussian:
    """A one-dimensional Gaussian belief.

    ``variance=math.inf`` is the uninformative belief; it is the identity for
    :func:`multiply` and :func:`divide`. Negative variances (improper beliefs)
    can show up as intermediate EP messages but are never stored in a learner.
    """

    mean: float = 0.0
    variance: float = math.inf

    def __post_init__(self) -> None:
        if math.isnan(self.mean) or math.isnan(self.variance):
            raise ValueError("Gaussian parameters must not be NaN")
        if self.variance == 0:
            raise ValueError("Gaussian variance must be non-zero")
        if math.isinf(self.mean):
            raise ValueError("Gaussian mean must be finite")
        if math.isinf(self.variance) and self.mean != 0.0:
            object.__setattr__(self, "mean", 0.0)

    @property
    def precision(self) -> float:
        return 0.0 if math.isinf(self.variance) else 1.0 / self.variance

    @property
    def precision_mean(self) -> float:
        return 0.0 if math.isinf(self.variance) else self.mean / self.variance

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def is_uninformative(self) -> bool:
        return math.isinf(self.variance)

    @property
    def is_proper(self) -> bool:
        return 0 < self.variance < math.inf

    @classmethod
    def from_precision(cls, precision: float, precision_mean: float) -> "Gaussian":
        if precision == 0.0:
            return UNINFORMATIVE
        return cls(precision_mean / precision, 1.0 / precision)

    def __mul__(self, other: "Gaussian") -> "Gaussian":
        return multiply(self, other)

    def __truediv__(self, other: "Gaussian") -> "Gaussian":
        return divide(self, other)


UNINFORMATIVE = Gaussian(0.0, math.inf)


def multiply(a: Gaussian, b: Gaussian) -> Gaussian:
    """Normalised product of two Gaussian densities."""
    return Gaussian.from_precision(
        a.precision + b.precision, a.precision_mean + b.precision_mean
    )


def divide(a: Gaussian, b: Gaussian) -> Gaussian:
    """Normalised quotient ``a / b``; zero resulting precision gives UNINFORMATIVE."""
    return Gaussian.from_precision(
        a.precision - b.precision, a.precision_mean - b.precision_mean
    )


def pdf(x: float, g: Gaussian = Gaussian(0.0, 1.0)) -> float:
    z = (x - g.mean) / g.std
    return math.exp(-0.5 * z * z - _LOG_SQRT_2PI) / g.std


def cdf(x: float, g: Gaussian = Gaussian(0.0, 1.0)) -> float:
    """P(X <= x) for X ~ g."""
    if not g.is_proper:
        raise ValueError("cdf needs a proper Gaussian")
    return float(special.ndtr((x - g.mean) / g.std))


def _log_phi(x: float) -> float:
    return -0.5 * x * x - _LOG_SQRT_2PI


def _check_survival(log_p: float) -> None:
    if log_p < _LOG_MIN_SURVIVAL:
        raise ImpossibleObservationError(
            f"observation has probability exp({log_p:.1f}) under the prior"
        )


def v_greater(t: float, eps: float = 0.0) -> float:
    """Mean correction for conditioning a standard normal on ``z > eps - t``."""
    x = t - eps
    _check_survival(float(special.log_ndtr(x)))
    # pdf(x)/cdf(x) written with the scaled erfc so neither side underflows
    return _SQRT_2_OVER_PI / float(special.erfcx(-x / _SQRT2))


def w_greater(t: float, eps: float = 0.0) -> float:
    """Variance correction matching :func:`v_greater`."""
    v = v_greater(t, eps)
    return v * (v + t - eps)


def _within_terms(t: float, eps: float) -> tuple[float, float]:
    # v is odd in t and w is even, so work with t >= 0 and flip the sign of v
    sign = 1.0
    if t < 0:
        t, sign = -t, -1.0
    upper = eps - t
    lower = -eps - t
    log_hi = float(special.log_ndtr(upper))
    log_lo = float(special.log_ndtr(lower))
    if log_lo >= log_hi:
        raise ImpossibleObservationError("zero-width draw interval")
    log_z = log_hi + math.log(-math.expm1(log_lo - log_hi))
    _check_survival(log_z)
    pdf_hi_over_z = math.exp(_log_phi(upper) - log_z)
    pdf_lo_over_z = math.exp(_log_phi(lower) - log_z)
    v = pdf_lo_over_z - pdf_hi_over_z
    w = v * v + upper * pdf_hi_over_z - lower * pdf_lo_over_z
    return sign * v, w


def v_within(t: float, eps: float) -> float:
    """Mean correction for conditioning a standard normal on ``|z + t| <= eps``."""
    return _within_terms(t, eps)[0]


def w_within(t: float, eps: float) -> float:
    """Variance correction matching :func:`v_within`."""
    return _within_terms(t, eps)[1]


def truncate_above(
    prior: Gaussian, threshold: float, margin: float = 0.0, mode: Mode = "greater"
) -> Gaussian:
    """Moment-matched posterior of ``prior`` after observing an inequality.

    ``mode="greater"`` conditions on ``x > threshold + margin``;
    ``mode="within"`` conditions on ``|x - threshold| <= margin``.
    """
    if not prior.is_proper:
        raise ValueError("truncate_above needs a proper prior")
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    if mode == "within" and math.isinf(margin):
        return prior
    sigma = prior.std
    t = (prior.mean - threshold) / sigma
    eps = margin / sigma
    if mode == "greater":
        v = v_greater(t, eps)
        w = w_greater(t, eps)
    elif mode == "within":
        v, w = _within_terms(t, eps)
    else:
        raise ValueError(f"unknown truncation mode {mode!r}")
    return Gaussian(prior.mean + sigma * v, prior.variance * (1.0 - w))
