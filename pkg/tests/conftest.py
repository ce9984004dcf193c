"""Shared fixtures for the ambiset test suite."""

import numpy as np
import pytest

from ambiset.config.logging import configure_logging
from ambiset.core.ground_space import from_points
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure
from ambiset.models.space import FiniteMetricSpace


@pytest.fixture(autouse=True)
def quiet_logging() -> None:
    """Send warnings to the current stderr; CLI commands rebind logging to captured streams."""
    configure_logging("WARNING")


@pytest.fixture
def line_space() -> FiniteMetricSpace:
    """Points 0, 1, 2, 3 on the real line."""
    return from_points([0.0, 1.0, 2.0, 3.0], 1.0)


@pytest.fixture
def two_point_space() -> FiniteMetricSpace:
    """Two points at distance 1."""
    return FiniteMetricSpace(points=["a", "b"], dist=[[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def dirac_pair(two_point_space: FiniteMetricSpace) -> AmbiguitySet:
    """Raw set of the two Diracs on the two-point space."""
    return AmbiguitySet(
        space=two_point_space,
        generators=[DiscreteMeasure.dirac(two_point_space, 0), DiscreteMeasure.dirac(two_point_space, 1)],
        convexify=False,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
