"""Ground space models: finite metric spaces and base points."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ambiset.errors import DimensionMismatch, InvalidIndex, ValidationFailure
from ambiset.models.arrays import FloatArray, FloatVector


class FiniteMetricSpace(BaseModel):
    """A finite point set with a dense distance matrix.

    Construction only checks shape, finiteness and sign. The metric axioms are
    checked by ``ambiset.core.ground_space.validate_space``; builders such as
    ``from_points`` produce metrics by construction.
    """

    model_config = ConfigDict(frozen=True)

    points: list[str] = Field(..., description="Opaque point labels, one per row of dist")
    dist: FloatArray = Field(..., description="n x n matrix of pairwise distances")

    @model_validator(mode="before")
    @classmethod
    def _default_labels(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("points") is None and data.get("dist") is not None:
            size = len(data["dist"])
            data = {**data, "points": [str(i) for i in range(size)]}
        return data

    @model_validator(mode="after")
    def _check_shape(self) -> "FiniteMetricSpace":
        if self.dist.ndim != 2 or self.dist.shape[0] != self.dist.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got shape {self.dist.shape}")
        if self.dist.shape[0] == 0:
            raise DimensionMismatch("a space needs at least one point")
        if len(self.points) != self.dist.shape[0]:
            raise DimensionMismatch(f"{len(self.points)} labels for a {self.dist.shape[0]}-point distance matrix")
        if len(set(self.points)) != len(self.points):
            raise ValidationFailure("point labels must be unique")
        if not np.all(np.isfinite(self.dist)):
            raise ValidationFailure("distances must be finite")
        if np.any(self.dist < 0):
            raise ValidationFailure("distances must be nonnegative")
        return self

    @property
    def size(self) -> int:
        """Number of points."""
        return int(self.dist.shape[0])

    @property
    def diameter(self) -> float:
        """Largest pairwise distance."""
        return float(self.dist.max())

    def distances_from(self, index: int) -> FloatVector:
        """Row of distances from the point at ``index``."""
        if not 0 <= index < self.size:
            raise InvalidIndex(f"point index {index} outside [0, {self.size})")
        return self.dist[index]

    def same_as(self, other: "FiniteMetricSpace") -> bool:
        """True when both describe the same labelled metric."""
        return self is other or self == other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.points == other.points and bool(np.array_equal(self.dist, other.dist))

    __hash__ = None  # type: ignore[assignment]


class BasePoint(BaseModel):
    """The reference point used by tail functionals."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(default=0, ge=0, description="Index of the point in its space")

    def resolve(self, space: FiniteMetricSpace) -> int:
        """Return the index after checking it addresses a point of ``space``."""
        if self.index >= space.size:
            raise InvalidIndex(f"base point {self.index} outside [0, {space.size})")
        return self.index
