"""Validation and construction of finite metric spaces."""

from collections.abc import Sequence
from enum import StrEnum
from typing import Any

import numpy as np
import numpy.typing as npt
import structlog

from ambiset.errors import (
    AsymmetricDistance,
    DimensionMismatch,
    DuplicatePoints,
    InvalidExponent,
    InvalidThreshold,
    NonpositiveScale,
    NonzeroDiagonal,
    TriangleViolation,
    ValidationFailure,
)
from ambiset.models.arrays import FloatVector
from ambiset.models.space import BasePoint, FiniteMetricSpace

log = structlog.get_logger(__name__)

DEFAULT_LENIENT_TOLERANCE = 1e-9
# Strict mode still forgives triangle defects at the level of float rounding.
STRICT_TRIANGLE_SLACK = 1e-12


class ValidationMode(StrEnum):
    """How to treat near-violations of the metric axioms."""

    STRICT = "strict"
    LENIENT = "lenient"


def _as_matrix(dist: Any) -> FloatVector:
    try:
        matrix = np.array(dist, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch("distance matrix must be a rectangular numeric array") from exc
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DimensionMismatch(f"distance matrix must be square and nonempty, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationFailure("distances must be finite")
    if np.any(matrix < 0):
        raise ValidationFailure("distances must be nonnegative")
    return matrix


def _first(mask: npt.NDArray[np.bool_]) -> tuple[int, ...]:
    return tuple(int(v) for v in np.argwhere(mask)[0])


def validate_space(
    dist: Any,
    mode: ValidationMode | str = ValidationMode.STRICT,
    tolerance: float = DEFAULT_LENIENT_TOLERANCE,
    labels: Sequence[str] | None = None,
) -> FiniteMetricSpace:
    """Check the metric axioms and return the validated space.

    Checks run in a fixed order (diagonal, symmetry, distinct points, triangle
    inequality) and the first failure is raised. Lenient mode zeroes diagonal
    entries and averages asymmetric pairs whose defect is within ``tolerance``
    (relative), and forgives triangle defects of the same size.
    """
    mode = ValidationMode(mode)
    if tolerance < 0:
        raise InvalidThreshold(f"tolerance must be nonnegative, got {tolerance!r}")
    matrix = _as_matrix(dist).copy()
    n = matrix.shape[0]
    lenient = mode is ValidationMode.LENIENT

    diagonal = np.diag(matrix)
    bad_diagonal = diagonal > (tolerance if lenient else 0.0)
    if np.any(bad_diagonal):
        i = int(np.argmax(bad_diagonal))
        raise NonzeroDiagonal(i, float(diagonal[i]))
    np.fill_diagonal(matrix, 0.0)

    defect = np.abs(matrix - matrix.T)
    allowed = tolerance * np.maximum(1.0, np.maximum(matrix, matrix.T)) if lenient else np.zeros_like(matrix)
    asymmetric = np.triu(defect > allowed, k=1)
    if np.any(asymmetric):
        i, j = _first(asymmetric)
        raise AsymmetricDistance(i, j, float(matrix[i, j]), float(matrix[j, i]))
    if lenient and np.any(defect > 0):
        log.debug("asymmetry_averaged", pairs=int(np.count_nonzero(np.triu(defect > 0, k=1))))
        matrix = (matrix + matrix.T) / 2.0

    coincident = np.triu(matrix == 0.0, k=1)
    if np.any(coincident):
        i, j = _first(coincident)
        raise DuplicatePoints(i, j)

    slack = tolerance if lenient else STRICT_TRIANGLE_SLACK
    for k in range(n):
        detour = matrix[:, k, None] + matrix[None, k, :]
        broken = matrix > detour + slack * np.maximum(1.0, matrix)
        if np.any(broken):
            i, j = _first(broken)
            raise TriangleViolation(i, j, k, float(matrix[i, j]), float(detour[i, j]))

    points = list(labels) if labels is not None else None
    return FiniteMetricSpace(points=points, dist=matrix)


def from_points(coords: Any, norm_exponent: float = 2.0, labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Metric space of a point cloud under the l_q distance, ``q = norm_exponent``.

    A flat list of numbers is read as points on the line.
    """
    if not np.isfinite(norm_exponent) or norm_exponent < 1:
        raise InvalidExponent(f"norm exponent must be a finite real >= 1, got {norm_exponent!r}")
    try:
        cloud = np.array(coords, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch("all points must share one dimension") from exc
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    if cloud.ndim != 2 or cloud.shape[0] == 0:
        raise DimensionMismatch(f"expected a nonempty list of vectors, got shape {cloud.shape}")
    if not np.all(np.isfinite(cloud)):
        raise ValidationFailure("coordinates must be finite")

    difference = cloud[:, None, :] - cloud[None, :, :]
    dist = np.linalg.norm(difference, ord=norm_exponent, axis=-1)
    coincident = np.triu(dist == 0.0, k=1)
    if np.any(coincident):
        i, j = _first(coincident)
        raise DuplicatePoints(i, j)
    points = list(labels) if labels is not None else None
    return FiniteMetricSpace(points=points, dist=dist)


def scale(space: FiniteMetricSpace, factor: float) -> FiniteMetricSpace:
    """Every distance multiplied by ``factor``."""
    if not np.isfinite(factor) or factor <= 0:
        raise NonpositiveScale(f"scale factor must be positive, got {factor!r}")
    return FiniteMetricSpace(points=space.points, dist=space.dist * factor)


def truncate(space: FiniteMetricSpace, cap: float = 1.0) -> FiniteMetricSpace:
    """The bounded metric ``min(d, cap)``."""
    if not np.isfinite(cap) or cap <= 0:
        raise InvalidThreshold(f"truncation cap must be positive, got {cap!r}")
    return FiniteMetricSpace(points=space.points, dist=np.minimum(space.dist, cap))


def diameter(space: FiniteMetricSpace) -> float:
    return space.diameter


def radius(space: FiniteMetricSpace, omega0: BasePoint | None = None) -> float:
    """Largest distance from the base point."""
    index = (omega0 or BasePoint()).resolve(space)
    return float(space.distances_from(index).max())
