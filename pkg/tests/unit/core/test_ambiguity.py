"""Unit tests for distances between finitely generated ambiguity sets."""

import math

import numpy as np
import pytest

from ambiset.core.ambiguity import (
    directed_distance,
    distance_to_hull,
    dual_distance,
    generalized_wasserstein,
    hull_equality,
    hull_membership,
)
from ambiset.core.ground_space import from_points
from ambiset.core.measures import mixture
from ambiset.core.transport import wasserstein
from ambiset.errors import InvalidExponent, SpaceMismatch
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure


@pytest.fixture
def endpoints(line_space) -> AmbiguitySet:
    """Hull of the Diracs at 0 and 3 on the line."""
    return AmbiguitySet(
        space=line_space,
        generators=[DiscreteMeasure.dirac(line_space, 0), DiscreteMeasure.dirac(line_space, 3)],
    )


def _random_set(space, rng, size: int, convexify: bool = True) -> AmbiguitySet:
    return AmbiguitySet.from_weights(space, rng.dirichlet(np.ones(space.size), size=size), convexify=convexify)


class TestDistanceToHull:
    """Test cases for distance_to_hull."""

    def test_outside_point(self, line_space, endpoints):
        """Test the closest mixture for a measure outside the hull."""
        value, weights = distance_to_hull(DiscreteMeasure.dirac(line_space, 1), endpoints)

        assert value == pytest.approx(1.0)
        np.testing.assert_allclose(weights, [1.0, 0.0], atol=1e-9)

    def test_quadratic_cost(self, line_space, endpoints):
        """Test that p = 2 takes the root of the optimal quadratic cost."""
        value, _ = distance_to_hull(DiscreteMeasure.dirac(line_space, 1), endpoints, 2.0)

        assert value == pytest.approx(1.0)

    def test_member_has_zero_distance(self, line_space, endpoints):
        """Test a measure inside the hull."""
        value, weights = distance_to_hull(DiscreteMeasure.uniform(line_space, [0, 3]), endpoints)

        assert value == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-9)

    def test_singleton_matches_wasserstein(self, line_space):
        """Test that a one-generator hull reduces to the classical distance."""
        target = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 3)])

        value, weights = distance_to_hull(DiscreteMeasure.uniform(line_space), target)

        assert value == pytest.approx(1.5)
        np.testing.assert_allclose(weights, [1.0])


class TestDirectedDistance:
    """Test cases for directed_distance under each pair of semantics."""

    def test_raw_set_inside_its_hull(self, dirac_pair):
        """Test that generators are at distance zero from their own hull."""
        report = directed_distance(dirac_pair, dirac_pair.with_convexify(True))

        assert report.value == pytest.approx(0.0, abs=1e-9)

    def test_hull_against_raw_set(self, dirac_pair):
        """Test that the midpoint of two Diracs is half a unit from both."""
        report = directed_distance(dirac_pair.with_convexify(True), dirac_pair)

        assert report.value == pytest.approx(0.5, abs=1e-9)
        assert report.source_mixture is not None
        np.testing.assert_allclose(report.source_mixture, [0.5, 0.5], atol=1e-6)

    def test_hull_against_raw_set_quadratic(self, dirac_pair):
        """Test the same configuration with p = 2."""
        report = directed_distance(dirac_pair.with_convexify(True), dirac_pair, 2.0)

        assert report.value == pytest.approx(math.sqrt(0.5), abs=1e-6)

    def test_hull_against_raw_set_is_a_lower_bound(self, dirac_pair):
        """Test that a supremum strictly inside the hull is marked as a search value below the generator bound."""
        report = directed_distance(dirac_pair.with_convexify(True), dirac_pair)

        assert report.upper_bound == pytest.approx(1.0)
        assert report.exact is False

    def test_hull_against_raw_set_meets_bound(self, line_space, endpoints):
        """Test that a supremum attained at a generator is certified by the bound."""
        target = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 0)], convexify=False)

        report = directed_distance(endpoints, target)

        assert report.value == pytest.approx(3.0)
        assert report.upper_bound == pytest.approx(3.0)
        assert report.exact is True
        assert generalized_wasserstein(endpoints, target).exact is True

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_hull_against_raw_set_matches_dense_sweep(self, seed):
        """Test the two-generator search against a fine sweep of the mixture weight."""
        rng = np.random.default_rng(seed)
        space = from_points(rng.random((5, 2)))
        source = _random_set(space, rng, 2)
        target = _random_set(space, rng, 3, convexify=False)

        sweep = max(
            min(wasserstein(mixture(source, [t, 1.0 - t]), nu)[0] for nu in target.generators)
            for t in np.linspace(0.0, 1.0, 1001)
        )
        report = directed_distance(source, target)

        assert report.value >= sweep - 1e-9
        # W_1 moves by at most diam * |dt| along the segment
        assert report.value <= sweep + space.diameter / 1000.0 + 1e-9
        assert report.value <= report.upper_bound + 1e-9

    def test_same_semantics_give_zero(self, dirac_pair):
        """Test raw-to-raw and hull-to-hull distances of a set to itself."""
        hull = dirac_pair.with_convexify(True)

        assert directed_distance(dirac_pair, dirac_pair).value == pytest.approx(0.0, abs=1e-12)
        assert directed_distance(hull, hull).value == pytest.approx(0.0, abs=1e-9)

    def test_witness_generator(self, line_space):
        """Test that the witness is the source generator farthest from the target."""
        source = AmbiguitySet(
            space=line_space,
            generators=[DiscreteMeasure.dirac(line_space, 0), DiscreteMeasure.dirac(line_space, 2)],
        )
        target = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 0)])

        report = directed_distance(source, target)

        assert report.value == pytest.approx(2.0)
        assert report.witness_generator == 1

    def test_rejects_bad_input(self, dirac_pair, line_space, endpoints):
        """Test exponent and space checks."""
        with pytest.raises(InvalidExponent):
            directed_distance(dirac_pair, dirac_pair, 0.0)
        with pytest.raises(SpaceMismatch):
            directed_distance(dirac_pair, endpoints)


class TestGeneralizedWasserstein:
    """Test cases for generalized_wasserstein and dual_distance."""

    def test_raw_set_against_hull(self, dirac_pair):
        """Test that convexifying one side changes the distance but not the dual."""
        report = generalized_wasserstein(dirac_pair, dirac_pair.with_convexify(True), with_dual=True)

        assert report.value == pytest.approx(0.5, abs=1e-9)
        assert report.forward.value == pytest.approx(0.0, abs=1e-9)
        assert report.backward.value == pytest.approx(0.5, abs=1e-9)
        assert report.dual_value == pytest.approx(0.0, abs=1e-9)

    def test_dual_only_for_p_one(self, dirac_pair):
        """Test that the dual value is omitted for p > 1."""
        report = generalized_wasserstein(dirac_pair, dirac_pair, p=2.0, with_dual=True)

        assert report.dual_value is None
        assert report.p == 2.0

    def test_singletons_reduce_to_wasserstein(self, line_space):
        """Test that singleton sets recover W_p."""
        first = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.uniform(line_space)])
        second = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 0)])

        assert generalized_wasserstein(first, second, 2.0).value == pytest.approx(math.sqrt(3.5))

    def test_dual_of_diracs(self, line_space):
        """Test the Lipschitz dual between two far-apart Diracs."""
        first = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 0)])
        second = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 3)])

        report = dual_distance(first, second)

        assert report.value == pytest.approx(3.0)
        assert report.forward == pytest.approx(3.0)
        assert report.backward == pytest.approx(3.0)
        assert report.witness.lipschitz_constant <= 1.0 + 1e-9
        assert report.witness.values[0] == 0.0

    def test_hull_distance_matches_dual(self, rng):
        """Test that hull-to-hull W_1 equals the Lipschitz dual on random instances."""
        for _ in range(10):
            space = from_points(rng.random((4, 2)))
            first, second = _random_set(space, rng, 2), _random_set(space, rng, 3)

            report = generalized_wasserstein(first, second, with_dual=True)

            assert report.dual_value == pytest.approx(report.value, abs=1e-7)

    def test_dual_bounds_every_semantics(self, rng):
        """Test that the dual never exceeds the distance, whichever sides are convexified."""
        for _ in range(5):
            space = from_points(rng.random((4, 2)))
            first, second = _random_set(space, rng, 2, False), _random_set(space, rng, 2, False)
            dual = dual_distance(first, second).value
            for a in (False, True):
                for b in (False, True):
                    value = generalized_wasserstein(first.with_convexify(a), second.with_convexify(b)).value
                    assert dual <= value + 1e-7

    def test_symmetry(self, rng):
        """Test that the distance does not depend on argument order."""
        space = from_points(rng.random((5, 2)))
        first, second = _random_set(space, rng, 3), _random_set(space, rng, 2)

        forward = generalized_wasserstein(first, second)
        backward = generalized_wasserstein(second, first)

        assert forward.value == pytest.approx(backward.value, abs=1e-9)


class TestHullMembership:
    """Test cases for hull_membership and hull_equality."""

    def test_member(self, line_space, endpoints):
        """Test a midpoint mixture with both certificates at zero."""
        report = hull_membership(DiscreteMeasure.uniform(line_space, [0, 3]), endpoints)

        assert report.member is True
        assert report.gap == pytest.approx(0.0, abs=1e-9)
        assert report.dual_gap == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(report.mixture, [0.5, 0.5], atol=1e-9)

    def test_non_member(self, line_space, endpoints):
        """Test a measure outside the hull."""
        report = hull_membership(DiscreteMeasure.dirac(line_space, 1), endpoints)

        assert report.member is False
        assert report.gap == pytest.approx(1.0)
        assert report.dual_gap == pytest.approx(1.0, abs=1e-7)

    def test_raw_flag_is_ignored(self, dirac_pair, two_point_space):
        """Test that membership always refers to the hull."""
        report = hull_membership(DiscreteMeasure.uniform(two_point_space), dirac_pair)

        assert report.member is True

    def test_random_mixtures_are_members(self, rng):
        """Test that every random mixture of the generators is recognized."""
        space = from_points(rng.random((5, 2)))
        ambiguity = _random_set(space, rng, 3)
        for _ in range(5):
            assert hull_membership(mixture(ambiguity, rng.dirichlet(np.ones(3))), ambiguity).member

    def test_hull_equality(self, line_space, endpoints):
        """Test that a redundant generator leaves the hull unchanged."""
        redundant = AmbiguitySet(
            space=line_space, generators=[*endpoints.generators, DiscreteMeasure.uniform(line_space, [0, 3])]
        )
        smaller = AmbiguitySet(
            space=line_space, generators=[DiscreteMeasure.dirac(line_space, 0), DiscreteMeasure.dirac(line_space, 1)]
        )

        assert hull_equality(endpoints, redundant)
        assert not hull_equality(endpoints, smaller)
