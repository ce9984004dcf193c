"""Expectations, upper and lower probabilities, and tail functionals."""

import math
from collections.abc import Iterable, Sequence

import numpy as np

from ambiset.errors import InvalidExponent, InvalidThreshold, InvalidWeights, SpaceMismatch
from ambiset.models.arrays import FloatVector
from ambiset.models.measures import (
    NEGATIVE_WEIGHT_NOISE,
    WEIGHT_SUM_TOLERANCE,
    AmbiguitySet,
    DiscreteMeasure,
    TestFunction,
    check_indices,
)
from ambiset.models.space import BasePoint, FiniteMetricSpace

# Generators whose value is within this of the maximum count as maximizers.
TIE_TOLERANCE = 1e-9


def check_exponent(p: float) -> float:
    """Return ``p`` as a float after checking it is a finite real >= 1."""
    try:
        value = float(p)
    except (TypeError, ValueError) as exc:
        raise InvalidExponent(f"transport exponent must be a real number, got {p!r}") from exc
    if not math.isfinite(value) or value < 1:
        raise InvalidExponent(f"transport exponent must be a finite real >= 1, got {p!r}")
    return value


def check_same_space(first: FiniteMetricSpace, second: FiniteMetricSpace) -> None:
    if not first.same_as(second):
        raise SpaceMismatch("operands live on different spaces")


def expectation(mu: DiscreteMeasure, phi: TestFunction) -> float:
    """``E_mu[phi]``."""
    check_same_space(mu.space, phi.space)
    return float(mu.weights @ phi.values)


def argmax_generator(
    ambiguity: AmbiguitySet, phi: TestFunction, tol: float = TIE_TOLERANCE
) -> tuple[float, int]:
    """Sublinear expectation with its lowest-index maximizing generator."""
    check_same_space(ambiguity.space, phi.space)
    values = ambiguity.weight_matrix @ phi.values
    best = float(values.max())
    return best, int(np.flatnonzero(values >= best - tol)[0])


def sublinear_expectation(ambiguity: AmbiguitySet, phi: TestFunction) -> float:
    """``E^P[phi]``: the largest generator expectation (the hull attains the same value)."""
    return argmax_generator(ambiguity, phi)[0]


def _masses(ambiguity: AmbiguitySet, subset: Iterable[int]) -> FloatVector:
    chosen = check_indices(ambiguity.space, subset)
    return ambiguity.weight_matrix[:, chosen].sum(axis=1)


def upper_probability(ambiguity: AmbiguitySet, subset: Iterable[int]) -> float:
    """Largest mass any model puts on ``subset``."""
    return float(_masses(ambiguity, subset).max())


def lower_probability(ambiguity: AmbiguitySet, subset: Iterable[int]) -> float:
    """Smallest mass any model puts on ``subset``."""
    return float(_masses(ambiguity, subset).min())


def lipschitz_constant(phi: TestFunction) -> float:
    return phi.lipschitz_constant


def tail_functional(ambiguity: AmbiguitySet, omega0: BasePoint, p: float, level: float) -> float:
    """``E^P[d(omega0, .)^p ; d(omega0, .) >= level]``."""
    p = check_exponent(p)
    if not math.isfinite(level) or level < 0:
        raise InvalidThreshold(f"tail level must be a finite real >= 0, got {level!r}")
    distances = ambiguity.space.distances_from(omega0.resolve(ambiguity.space))
    tail = np.where(distances >= level, distances**p, 0.0)
    return float((ambiguity.weight_matrix @ tail).max())


def mixture(ambiguity: AmbiguitySet, weights: Sequence[float] | FloatVector) -> DiscreteMeasure:
    """The hull point ``sum_j weights[j] * generator_j``."""
    lam = np.asarray(weights, dtype=np.float64)
    if lam.shape != (ambiguity.size,):
        raise InvalidWeights(f"expected {ambiguity.size} mixture weights, got shape {lam.shape}")
    if np.any(lam < -NEGATIVE_WEIGHT_NOISE) or abs(float(lam.sum()) - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise InvalidWeights(f"mixture weights must be a probability vector, got {lam.tolist()!r}")
    lam = np.clip(lam, 0.0, None)
    return DiscreteMeasure(space=ambiguity.space, weights=(lam / lam.sum()) @ ambiguity.weight_matrix)
