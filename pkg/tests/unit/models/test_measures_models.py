"""Unit tests for measures, ambiguity sets and test functions."""

import numpy as np
import pytest

from ambiset.errors import DimensionMismatch, EmptySet, InvalidIndex, InvalidThreshold, InvalidWeights, SpaceMismatch
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure, TestFunction
from ambiset.models.space import FiniteMetricSpace


class TestDiscreteMeasure:
    """Test cases for the DiscreteMeasure model."""

    def test_small_deviation_is_renormalized(self, line_space):
        """Test that sums within 1e-9 of one are renormalized."""
        mu = DiscreteMeasure(space=line_space, weights=[0.5, 0.5 + 5e-10, 0.0, 0.0])

        assert mu.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_large_deviation_is_rejected(self, line_space):
        """Test that sums further than 1e-9 from one are rejected."""
        with pytest.raises(InvalidWeights):
            DiscreteMeasure(space=line_space, weights=[0.5, 0.5 + 1e-6, 0.0, 0.0])

    def test_negative_weight_is_rejected(self, line_space):
        """Test that clearly negative weights are rejected."""
        with pytest.raises(InvalidWeights):
            DiscreteMeasure(space=line_space, weights=[1.1, -0.1, 0.0, 0.0])

    def test_rounding_noise_is_clipped(self, line_space):
        """Test that tiny negative weights are clipped to zero."""
        mu = DiscreteMeasure(space=line_space, weights=[1.0, -1e-13, 0.0, 0.0])

        assert mu.weights[1] == 0.0
        assert mu.support() == [0]

    def test_length_must_match_space(self, line_space):
        """Test that the weight vector length must equal the space size."""
        with pytest.raises(DimensionMismatch):
            DiscreteMeasure(space=line_space, weights=[0.5, 0.5])

    def test_dirac_and_uniform(self, line_space):
        """Test the convenience constructors."""
        np.testing.assert_array_equal(DiscreteMeasure.dirac(line_space, 2).weights, [0.0, 0.0, 1.0, 0.0])
        np.testing.assert_allclose(DiscreteMeasure.uniform(line_space, [1, 3]).weights, [0.0, 0.5, 0.0, 0.5])
        with pytest.raises(InvalidIndex):
            DiscreteMeasure.dirac(line_space, 9)

    def test_equality(self, line_space):
        """Test value equality of measures."""
        assert DiscreteMeasure.dirac(line_space, 1) == DiscreteMeasure(space=line_space, weights=[0, 1, 0, 0])
        assert DiscreteMeasure.dirac(line_space, 1) != DiscreteMeasure.dirac(line_space, 2)


class TestAmbiguitySet:
    """Test cases for the AmbiguitySet model."""

    def test_from_weights(self, line_space):
        """Test building a set from weight rows."""
        ambiguity = AmbiguitySet.from_weights(line_space, [[1, 0, 0, 0], [0, 0, 0.5, 0.5]])

        assert ambiguity.size == 2
        assert ambiguity.convexify is True
        assert ambiguity.weight_matrix.shape == (2, 4)
        assert ambiguity.support() == [0, 2, 3]

    def test_empty_set_rejected(self, line_space):
        """Test that a set needs a generator."""
        with pytest.raises(EmptySet):
            AmbiguitySet(space=line_space, generators=[])

    def test_generators_share_space(self, line_space, two_point_space):
        """Test that generators on another space are rejected."""
        with pytest.raises(SpaceMismatch):
            AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(two_point_space, 0)])

    def test_with_convexify(self, dirac_pair):
        """Test switching between raw and hull semantics."""
        hull = dirac_pair.with_convexify(True)

        assert hull.convexify is True
        assert hull.generators == dirac_pair.generators
        assert hull != dirac_pair


class TestTestFunction:
    """Test cases for the TestFunction model."""

    def test_indicator(self, line_space):
        """Test indicator functions."""
        np.testing.assert_array_equal(TestFunction.indicator(line_space, [0, 3]).values, [1.0, 0.0, 0.0, 1.0])

    def test_distance_to_is_one_lipschitz(self, line_space):
        """Test that distance functions, capped or not, are 1-Lipschitz."""
        phi = TestFunction.distance_to(line_space, 0)
        capped = TestFunction.distance_to(line_space, 0, cap=1.5)

        np.testing.assert_array_equal(capped.values, [0.0, 1.0, 1.5, 1.5])
        assert phi.lipschitz_constant == pytest.approx(1.0)
        assert capped.lipschitz_constant == pytest.approx(1.0)

    def test_lipschitz_constant(self, line_space):
        """Test the largest difference quotient."""
        phi = TestFunction(space=line_space, values=[0.0, 3.0, 3.0, 3.0])

        assert phi.lipschitz_constant == pytest.approx(3.0)
        assert TestFunction.constant(line_space, 2.0).lipschitz_constant == 0.0

    def test_lipschitz_constant_single_point(self):
        """Test that a one-point space gives constant 0."""
        space = FiniteMetricSpace(dist=[[0.0]])

        assert TestFunction(space=space, values=[4.0]).lipschitz_constant == 0.0

    def test_clipped(self, line_space):
        """Test truncation to [-level, level]."""
        phi = TestFunction(space=line_space, values=[-3.0, -0.5, 0.5, 3.0])

        np.testing.assert_array_equal(phi.clipped(1.0).values, [-1.0, -0.5, 0.5, 1.0])
        with pytest.raises(InvalidThreshold):
            phi.clipped(-1.0)

    def test_values_must_be_finite(self, line_space):
        """Test that infinite values are rejected."""
        with pytest.raises(InvalidWeights):
            TestFunction(space=line_space, values=[0.0, np.inf, 0.0, 0.0])
