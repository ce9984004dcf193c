"""Unit tests for convergence experiment models."""

import pytest

from ambiset.errors import DimensionMismatch, EmptySet, SpaceMismatch
from ambiset.models.convergence import ConvergenceRule, MetrizationReport, SetSequence
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure


class TestConvergenceRule:
    """Test cases for the ConvergenceRule model."""

    def test_harmonic_trace_converges(self):
        """Test that 1/n over 50 terms is judged convergent."""
        trace = [1.0 / n for n in range(1, 51)]

        assert ConvergenceRule().tends_to_zero(trace) is True

    def test_constant_trace_diverges(self):
        """Test that a constant positive trace is not convergent."""
        assert ConvergenceRule().tends_to_zero([1.0] * 20) is False

    def test_oscillating_trace_diverges(self):
        """Test that a trace returning to its peak in the window is not convergent."""
        trace = [float(n % 2) for n in range(1, 41)]

        assert ConvergenceRule().tends_to_zero(trace) is False

    def test_flat_trailing_trace_diverges(self):
        """Test that a trace settling at a nonzero level below the relative cutoff is not convergent."""
        rule = ConvergenceRule()

        assert rule.tends_to_zero([1.0] + [0.09] * 20) is False
        assert rule.tends_to_zero([10.0] + [0.5] * 20) is False

    def test_rising_window_diverges(self):
        """Test that a window that climbs back up is not convergent even below the cutoff."""
        trace = [1.0] + [0.05 + 0.001 * n for n in range(20)]

        assert ConvergenceRule().tends_to_zero(trace) is False

    def test_still_decreasing(self):
        """Test the monotone clause with its slack."""
        rule = ConvergenceRule(monotone_slack=1e-6)

        assert rule.still_decreasing([0.3, 0.2, 0.2 + 5e-7, 0.1]) is True
        assert rule.still_decreasing([0.3, 0.2, 0.25, 0.1]) is False
        assert rule.still_decreasing([0.2, 0.2]) is False
        assert rule.still_decreasing([0.2]) is False

    def test_tiny_trace_converges(self):
        """Test that values below the absolute threshold count as zero."""
        assert ConvergenceRule().tends_to_zero([5e-5, 5e-5, 5e-5]) is True
        assert ConvergenceRule().tends_to_zero([]) is True

    def test_window(self):
        """Test the trailing window, with at least two terms when available."""
        rule = ConvergenceRule()

        assert rule.window([1.0, 2.0, 3.0]) == [2.0, 3.0]
        assert rule.window([4.0]) == [4.0]
        assert rule.window(list(range(8))) == [6, 7]
        assert rule.limsup_proxy([3.0, 1.0, 2.0]) == 2.0
        assert rule.liminf_proxy([3.0, 1.0, 2.0]) == 1.0

    def test_threshold_scales_with_peak(self):
        """Test the relative part of the threshold."""
        rule = ConvergenceRule(abs_threshold=1e-4, rel_threshold=0.1)

        assert rule.threshold([10.0, 1.0]) == pytest.approx(1.0)
        assert rule.threshold([1e-5]) == 1e-4

    def test_describe(self):
        """Test the human-readable rule."""
        description = ConvergenceRule().describe()

        assert description.startswith("max over the last 25% of terms <= 0.0001")
        assert "max(0.0001, 0.1 * peak)" in description
        assert "nonincreasing (slack 1e-09)" in description


class TestSetSequence:
    """Test cases for the SetSequence model."""

    def test_sequence_length(self, line_space):
        """Test building a sequence and its length."""
        terms = [AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, i)]) for i in range(3)]
        seq = SetSequence(space=line_space, terms=terms, limit=terms[0])

        assert len(seq) == 3
        assert seq.name == "custom"

    def test_empty_sequence_rejected(self, line_space):
        """Test that a sequence needs a term."""
        limit = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 0)])

        with pytest.raises(EmptySet):
            SetSequence(space=line_space, terms=[], limit=limit)

    def test_limit_on_other_space_rejected(self, line_space, two_point_space):
        """Test that the limit must share the space."""
        term = AmbiguitySet(space=line_space, generators=[DiscreteMeasure.dirac(line_space, 0)])
        limit = AmbiguitySet(space=two_point_space, generators=[DiscreteMeasure.dirac(two_point_space, 0)])

        with pytest.raises(SpaceMismatch, match="limit"):
            SetSequence(space=line_space, terms=[term], limit=limit)


class TestMetrizationReport:
    """Test cases for the MetrizationReport model."""

    def test_trace_lengths_must_agree(self):
        """Test that every trace needs one entry per term."""
        with pytest.raises(DimensionMismatch):
            MetrizationReport(
                family="custom",
                p=1.0,
                omega0=0,
                k_grid=[1.0],
                distance_trace=[1.0, 0.5],
                weak_gap_trace=[1.0],
                growth_gap_trace=[1.0, 0.5],
                tail_trace=[[0.0], [0.0]],
                limit_tail=[0.0],
                metric_convergence=True,
                growth_convergence=True,
                weak_convergence=True,
                tail_condition=True,
                weak_with_tails=True,
                consistent=True,
                rule="custom",
            )
