"""Discrete measures, ambiguity sets and test functions."""

from collections.abc import Iterable, Sequence
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ambiset.errors import DimensionMismatch, EmptySet, InvalidIndex, InvalidThreshold, InvalidWeights, SpaceMismatch
from ambiset.models.arrays import FloatArray, FloatVector, as_frozen_array
from ambiset.models.space import FiniteMetricSpace

# Sums further than this from one are rejected; closer sums are renormalized.
WEIGHT_SUM_TOLERANCE = 1e-9
# Negative weights down to this level are rounding noise and are clipped.
NEGATIVE_WEIGHT_NOISE = 1e-12


def check_indices(space: FiniteMetricSpace, indices: Iterable[int]) -> list[int]:
    """Return ``indices`` as a sorted list of distinct valid point indices."""
    result = sorted(set(indices))
    for index in result:
        if not 0 <= index < space.size:
            raise InvalidIndex(f"point index {index} outside [0, {space.size})")
    return result


class DiscreteMeasure(BaseModel):
    """A probability vector over the points of a finite metric space."""

    model_config = ConfigDict(frozen=True)

    space: FiniteMetricSpace = Field(..., description="Ground space the measure lives on")
    weights: FloatArray = Field(..., description="Probability mass per point")

    @field_validator("weights")
    @classmethod
    def _normalize(cls, weights: FloatVector) -> FloatVector:
        if weights.ndim != 1:
            raise DimensionMismatch(f"weights must be a vector, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise InvalidWeights("weights must be finite")
        if np.any(weights < -NEGATIVE_WEIGHT_NOISE):
            raise InvalidWeights(f"negative weight {float(weights.min())!r}")
        clipped = np.clip(weights, 0.0, None)
        total = float(clipped.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise InvalidWeights(f"weights sum to {total!r}, expected 1")
        return as_frozen_array(clipped / total)

    @model_validator(mode="after")
    def _check_length(self) -> "DiscreteMeasure":
        if self.weights.shape[0] != self.space.size:
            raise DimensionMismatch(f"{self.weights.shape[0]} weights for a {self.space.size}-point space")
        return self

    @classmethod
    def dirac(cls, space: FiniteMetricSpace, index: int) -> "DiscreteMeasure":
        """Unit mass at one point."""
        check_indices(space, [index])
        weights = np.zeros(space.size)
        weights[index] = 1.0
        return cls(space=space, weights=weights)

    @classmethod
    def uniform(cls, space: FiniteMetricSpace, indices: Iterable[int] | None = None) -> "DiscreteMeasure":
        """Equal mass on ``indices`` (all points by default)."""
        chosen = check_indices(space, range(space.size) if indices is None else indices)
        if not chosen:
            raise InvalidWeights("a uniform measure needs at least one point")
        weights = np.zeros(space.size)
        weights[chosen] = 1.0 / len(chosen)
        return cls(space=space, weights=weights)

    def support(self) -> list[int]:
        """Indices carrying positive mass."""
        return [int(i) for i in np.flatnonzero(self.weights > 0.0)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self.space.same_as(other.space) and bool(np.array_equal(self.weights, other.weights))

    __hash__ = None  # type: ignore[assignment]


class AmbiguitySet(BaseModel):
    """A finite list of measures generating a set of models.

    With ``convexify`` the set stands for the convex hull of its generators;
    without it, for the generators themselves.
    """

    model_config = ConfigDict(frozen=True)

    space: FiniteMetricSpace = Field(..., description="Ground space shared by every generator")
    generators: list[DiscreteMeasure] = Field(..., description="Generating measures")
    convexify: bool = Field(default=True, description="Interpret the set as the convex hull of its generators")

    @model_validator(mode="after")
    def _check_generators(self) -> "AmbiguitySet":
        if not self.generators:
            raise EmptySet("an ambiguity set needs at least one generator")
        for position, generator in enumerate(self.generators):
            if not generator.space.same_as(self.space):
                raise SpaceMismatch(f"generator {position} lives on a different space")
        return self

    @classmethod
    def from_weights(
        cls, space: FiniteMetricSpace, rows: Sequence[Sequence[float]] | Any, convexify: bool = True
    ) -> "AmbiguitySet":
        """Build a set from raw weight rows."""
        generators = [DiscreteMeasure(space=space, weights=row) for row in rows]
        return cls(space=space, generators=generators, convexify=convexify)

    @property
    def size(self) -> int:
        """Number of generators."""
        return len(self.generators)

    @property
    def weight_matrix(self) -> FloatVector:
        """Generators stacked as a (k, n) matrix."""
        return np.vstack([generator.weights for generator in self.generators])

    def support(self) -> list[int]:
        """Union of generator supports."""
        return [int(i) for i in np.flatnonzero(self.weight_matrix.max(axis=0) > 0.0)]

    def with_convexify(self, convexify: bool) -> "AmbiguitySet":
        """Same generators under the other semantics."""
        return AmbiguitySet(space=self.space, generators=self.generators, convexify=convexify)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AmbiguitySet):
            return NotImplemented
        return (
            self.convexify == other.convexify
            and self.space.same_as(other.space)
            and len(self.generators) == len(other.generators)
            and all(a == b for a, b in zip(self.generators, other.generators, strict=True))
        )

    __hash__ = None  # type: ignore[assignment]


class TestFunction(BaseModel):
    """A real function on the points of a finite metric space."""

    __test__ = False  # not a pytest test class

    model_config = ConfigDict(frozen=True)

    space: FiniteMetricSpace = Field(..., description="Ground space the function is defined on")
    values: FloatArray = Field(..., description="Function value at each point")

    @model_validator(mode="after")
    def _check_values(self) -> "TestFunction":
        if self.values.ndim != 1 or self.values.shape[0] != self.space.size:
            raise DimensionMismatch(f"expected {self.space.size} values, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidWeights("test function values must be finite")
        return self

    @classmethod
    def indicator(cls, space: FiniteMetricSpace, subset: Iterable[int]) -> "TestFunction":
        """1 on ``subset``, 0 elsewhere."""
        values = np.zeros(space.size)
        values[check_indices(space, subset)] = 1.0
        return cls(space=space, values=values)

    @classmethod
    def constant(cls, space: FiniteMetricSpace, value: float) -> "TestFunction":
        return cls(space=space, values=np.full(space.size, float(value)))

    @classmethod
    def distance_to(cls, space: FiniteMetricSpace, index: int, cap: float | None = None) -> "TestFunction":
        """``d(index, .)``, optionally capped; 1-Lipschitz either way."""
        values = np.array(space.distances_from(index))
        if cap is not None:
            values = np.minimum(values, cap)
        return cls(space=space, values=values)

    @property
    def lipschitz_constant(self) -> float:
        """Largest ``|phi(i) - phi(j)| / d(i, j)`` over distinct points; 0 on a single point."""
        if self.space.size == 1:
            return 0.0
        spread = np.abs(self.values[:, None] - self.values[None, :])
        off_diagonal = ~np.eye(self.space.size, dtype=bool)
        dist = self.space.dist
        ratios = np.divide(
            spread, dist, out=np.where(spread > 0.0, np.inf, 0.0), where=(dist > 0.0) & off_diagonal
        )
        return float(ratios[off_diagonal].max())

    def clipped(self, level: float) -> "TestFunction":
        """Truncation ``(-level v phi) ^ level``."""
        if level < 0:
            raise InvalidThreshold(f"clipping level must be nonnegative, got {level!r}")
        return TestFunction(space=self.space, values=np.clip(self.values, -level, level))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TestFunction):
            return NotImplemented
        return self.space.same_as(other.space) and bool(np.array_equal(self.values, other.values))

    __hash__ = None  # type: ignore[assignment]
