"""Two-team comparison factor shared by the TrueLearn classifiers.

A comparison observes the sign (or the draw band) of

    D = sum_k a_k * theta_k + offset + noise,   noise ~ N(0, noise_variance)

where the ``theta_k`` are independent Gaussian beliefs. The update is one EP
pass: truncate the marginal of D, take the quotient to get the message on D,
send it back through the weighted-sum factor to each belief.
"""

from __future__ import annotations

import math
from typing import Literal, Sequence

from ..bayes import Gaussian, cdf, multiply, divide, truncate_above

Outcome = Literal["greater", "less", "within"]

_STANDARD = Gaussian(0.0, 1.0)


def difference(
    beliefs: Sequence[Gaussian], weights: Sequence[float], offset: float, noise_variance: float
) -> Gaussian:
    mean = offset + sum(a * g.mean for a, g in zip(weights, beliefs))
    variance = noise_variance + sum(a * a * g.variance for a, g in zip(weights, beliefs))
    return Gaussian(mean, variance)


def prob_greater(diff: Gaussian, margin: float = 0.0) -> float:
    """P(D > margin)."""
    return cdf((diff.mean - margin) / diff.std, _STANDARD)


def prob_within(diff: Gaussian, margin: float) -> float:
    """P(|D| <= margin)."""
    if margin <= 0:
        return 0.0
    if math.isinf(margin):
        return 1.0
    s = diff.std
    return cdf((margin - diff.mean) / s, _STANDARD) - cdf((-margin - diff.mean) / s, _STANDARD)


def update(
    beliefs: Sequence[Gaussian],
    weights: Sequence[float],
    offset: float,
    noise_variance: float,
    outcome: Outcome,
    margin: float = 0.0,
) -> list[Gaussian]:
    """Posterior beliefs after observing ``outcome`` for D.

    ``greater``: D > margin. ``less``: D < -margin. ``within``: |D| <= margin.
    """
    prior = difference(beliefs, weights, offset, noise_variance)
    if outcome == "less":
        mirrored = Gaussian(-prior.mean, prior.variance)
        post = truncate_above(mirrored, 0.0, margin, "greater")
        message = divide(post, mirrored)
        message = Gaussian(-message.mean, message.variance) if message.is_proper else message
    elif outcome in ("greater", "within"):
        post = truncate_above(prior, 0.0, margin, outcome)
        message = divide(post, prior)
    else:
        raise ValueError(f"unknown outcome {outcome!r}")

    if message.precision <= 0.0:
        # no information (or round-off noise claiming negative information)
        return list(beliefs)

    posteriors = []
    for a, belief in zip(weights, beliefs):
        if a == 0.0:
            posteriors.append(belief)
            continue
        # everything in D except a * theta_k, marginalised out of the message
        rest_mean = prior.mean - a * belief.mean
        rest_variance = prior.variance - a * a * belief.variance
        to_scaled = Gaussian(message.mean - rest_mean, message.variance + rest_variance)
        to_belief = Gaussian(to_scaled.mean / a, to_scaled.variance / (a * a))
        posteriors.append(multiply(belief, to_belief))
    return posteriors
