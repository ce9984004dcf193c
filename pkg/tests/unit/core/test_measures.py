"""Unit tests for expectations, capacities and tail functionals."""

import numpy as np
import pytest

from ambiset.core.ground_space import from_points
from ambiset.core.measures import (
    argmax_generator,
    check_exponent,
    expectation,
    lipschitz_constant,
    lower_probability,
    mixture,
    sublinear_expectation,
    tail_functional,
    upper_probability,
)
from ambiset.errors import InvalidExponent, InvalidIndex, InvalidThreshold, InvalidWeights, SpaceMismatch
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure, TestFunction
from ambiset.models.space import BasePoint


@pytest.fixture
def spread_set(line_space) -> AmbiguitySet:
    """The Dirac at 3 together with the uniform measure."""
    return AmbiguitySet(
        space=line_space, generators=[DiscreteMeasure.dirac(line_space, 3), DiscreteMeasure.uniform(line_space)]
    )


class TestExpectations:
    """Test cases for linear and sublinear expectations."""

    def test_expectation(self, line_space):
        """Test the mean of the distance to the origin under the uniform measure."""
        mu = DiscreteMeasure.uniform(line_space)

        assert expectation(mu, TestFunction.distance_to(line_space, 0)) == pytest.approx(1.5)

    def test_expectation_space_mismatch(self, line_space, two_point_space):
        """Test that operands must share a space."""
        with pytest.raises(SpaceMismatch):
            expectation(DiscreteMeasure.dirac(line_space, 0), TestFunction.constant(two_point_space, 1.0))

    def test_argmax_generator(self, spread_set, line_space):
        """Test the maximizing generator and its value."""
        value, index = argmax_generator(spread_set, TestFunction.distance_to(line_space, 0))

        assert value == pytest.approx(3.0)
        assert index == 0

    def test_argmax_ties_pick_lowest_index(self, spread_set, line_space):
        """Test that equal expectations resolve to the first generator."""
        value, index = argmax_generator(spread_set, TestFunction.constant(line_space, 2.0))

        assert value == pytest.approx(2.0)
        assert index == 0

    def test_sublinear_expectation_axioms(self, spread_set, line_space, rng):
        """Test monotonicity, constants, subadditivity and positive homogeneity."""
        for _ in range(50):
            phi = TestFunction(space=line_space, values=rng.normal(size=4))
            psi = TestFunction(space=line_space, values=rng.normal(size=4))
            larger = TestFunction(space=line_space, values=phi.values + np.abs(rng.normal(size=4)))
            c, lam = float(rng.normal()), float(rng.uniform(0.0, 5.0))

            assert sublinear_expectation(spread_set, larger) >= sublinear_expectation(spread_set, phi) - 1e-12
            assert sublinear_expectation(spread_set, TestFunction.constant(line_space, c)) == pytest.approx(c)
            combined = TestFunction(space=line_space, values=phi.values + psi.values)
            assert sublinear_expectation(spread_set, combined) <= (
                sublinear_expectation(spread_set, phi) + sublinear_expectation(spread_set, psi) + 1e-12
            )
            scaled = TestFunction(space=line_space, values=lam * phi.values)
            assert sublinear_expectation(spread_set, scaled) == pytest.approx(
                lam * sublinear_expectation(spread_set, phi)
            )

    def test_hull_attains_generator_maximum(self, rng):
        """Test that none of 1000 random hull mixtures beats the best generator, on several random sets."""
        for _ in range(5):
            space = from_points(rng.random((6, 2)))
            ambiguity = AmbiguitySet.from_weights(space, rng.dirichlet(np.ones(6), size=int(rng.integers(2, 5))))
            phi = TestFunction(space=space, values=rng.normal(size=6))
            best = sublinear_expectation(ambiguity, phi)

            for weights in rng.dirichlet(np.ones(ambiguity.size), size=1000):
                assert expectation(mixture(ambiguity, weights), phi) <= best + 1e-12

    def test_lipschitz_constant(self, line_space):
        """Test the module-level Lipschitz constant accessor."""
        assert lipschitz_constant(TestFunction(space=line_space, values=[0.0, 2.0, 2.0, 2.0])) == pytest.approx(2.0)


class TestCapacities:
    """Test cases for upper and lower probabilities."""

    def test_upper_and_lower_probability(self, spread_set):
        """Test extreme masses on a subset."""
        assert upper_probability(spread_set, [3]) == pytest.approx(1.0)
        assert lower_probability(spread_set, [3]) == pytest.approx(0.25)
        assert upper_probability(spread_set, [0, 1]) == pytest.approx(0.5)
        assert lower_probability(spread_set, [0, 1]) == pytest.approx(0.0)

    def test_empty_and_full_subsets(self, spread_set):
        """Test the trivial events."""
        assert upper_probability(spread_set, []) == 0.0
        assert lower_probability(spread_set, range(4)) == pytest.approx(1.0)

    def test_conjugacy(self, spread_set):
        """Test that lower(A) = 1 - upper(complement of A)."""
        assert lower_probability(spread_set, [0, 3]) == pytest.approx(1.0 - upper_probability(spread_set, [1, 2]))

    def test_invalid_index(self, spread_set):
        """Test that subsets must address points of the space."""
        with pytest.raises(InvalidIndex):
            upper_probability(spread_set, [7])


class TestTailFunctional:
    """Test cases for tail_functional."""

    def test_tail_values(self, spread_set):
        """Test the p-th moment beyond a level."""
        origin = BasePoint()

        assert tail_functional(spread_set, origin, 1.0, 2.0) == pytest.approx(3.0)
        assert tail_functional(spread_set, origin, 2.0, 3.0) == pytest.approx(9.0)
        assert tail_functional(spread_set, origin, 1.0, 0.0) == pytest.approx(3.0)
        assert tail_functional(spread_set, origin, 1.0, 3.5) == 0.0

    def test_tail_from_other_base_point(self, spread_set):
        """Test moving the base point."""
        assert tail_functional(spread_set, BasePoint(index=3), 1.0, 1.0) == pytest.approx((3 + 2 + 1) / 4)

    def test_invalid_arguments(self, spread_set):
        """Test rejection of bad levels and exponents."""
        with pytest.raises(InvalidThreshold):
            tail_functional(spread_set, BasePoint(), 1.0, -1.0)
        with pytest.raises(InvalidExponent):
            tail_functional(spread_set, BasePoint(), 0.5, 1.0)


class TestMixture:
    """Test cases for mixture and check_exponent."""

    def test_mixture(self, spread_set):
        """Test materializing a hull point."""
        mu = mixture(spread_set, [0.5, 0.5])

        np.testing.assert_allclose(mu.weights, [0.125, 0.125, 0.125, 0.625])

    def test_mixture_rejects_bad_weights(self, spread_set):
        """Test that mixture weights must form a probability vector."""
        with pytest.raises(InvalidWeights):
            mixture(spread_set, [0.7, 0.7])
        with pytest.raises(InvalidWeights):
            mixture(spread_set, [1.0])

    def test_check_exponent(self):
        """Test exponent coercion and validation."""
        assert check_exponent(2) == 2.0
        assert check_exponent("1.5") == 1.5
        for bad in (0.5, float("inf"), float("nan"), "abc", None):
            with pytest.raises(InvalidExponent):
                check_exponent(bad)
