"""Models for sequence-level convergence experiments."""

import itertools
import math
from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ambiset.errors import DimensionMismatch, EmptySet, SpaceMismatch
from ambiset.models.measures import AmbiguitySet
from ambiset.models.space import FiniteMetricSpace


class SetSequence(BaseModel):
    """A finite run ``P_1, ..., P_N`` of ambiguity sets and its intended limit."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(default="custom", description="Family name, for reports")
    space: FiniteMetricSpace = Field(..., description="Ground space shared by every term")
    terms: list[AmbiguitySet] = Field(..., description="Sequence terms in order")
    limit: AmbiguitySet = Field(..., description="Candidate limit")

    @model_validator(mode="after")
    def _check_space(self) -> "SetSequence":
        if not self.terms:
            raise EmptySet("a sequence needs at least one term")
        for position, term in enumerate([*self.terms, self.limit]):
            if not term.space.same_as(self.space):
                label = "limit" if position == len(self.terms) else f"term {position + 1}"
                raise SpaceMismatch(f"{label} lives on a different space")
        return self

    def __len__(self) -> int:
        return len(self.terms)


class ConvergenceRule(BaseModel):
    """Numerical stand-in for "the trace tends to zero".

    A trace is judged convergent when its trailing window (the limsup proxy)
    is already below ``abs_threshold``, or when three things hold: the final
    value and the window maximum are at most
    ``max(abs_threshold, rel_threshold * peak)``, the window is nonincreasing
    within ``monotone_slack``, and it ends strictly below where it starts.
    A trace that settles at a nonzero level fails the last clause.
    """

    model_config = ConfigDict(frozen=True)

    abs_threshold: float = Field(default=1e-4, ge=0.0, description="Absolute level counted as zero")
    rel_threshold: float = Field(default=0.1, ge=0.0, le=1.0, description="Level counted as zero, relative to the peak")
    window_fraction: float = Field(default=0.25, gt=0.0, le=1.0, description="Share of trailing terms in the window")
    monotone_slack: float = Field(default=1e-9, ge=0.0, description="Allowed rise between consecutive window terms")

    def window(self, trace: Sequence[float]) -> list[float]:
        """Trailing terms used as the limsup proxy (at least two when available)."""
        size = min(len(trace), max(2, math.ceil(self.window_fraction * len(trace))))
        return list(trace[len(trace) - size :])

    def limsup_proxy(self, trace: Sequence[float]) -> float:
        return max(self.window(trace), default=0.0)

    def liminf_proxy(self, trace: Sequence[float]) -> float:
        return min(self.window(trace), default=0.0)

    def threshold(self, trace: Sequence[float]) -> float:
        peak = max((abs(value) for value in trace), default=0.0)
        return max(self.abs_threshold, self.rel_threshold * peak)

    def still_decreasing(self, window: Sequence[float]) -> bool:
        """Nonincreasing within the slack, and lower at the end than at the start."""
        if len(window) < 2:
            return False
        steady = all(b <= a + self.monotone_slack for a, b in itertools.pairwise(window))
        return steady and window[-1] < window[0] - self.monotone_slack

    def tends_to_zero(self, trace: Sequence[float]) -> bool:
        if not trace:
            return True
        tail = [abs(value) for value in self.window(trace)]
        if max(tail) <= self.abs_threshold:
            return True
        level = self.threshold(trace)
        if abs(trace[-1]) > level or max(tail) > level:
            return False
        return self.still_decreasing(tail)

    def describe(self) -> str:
        return (
            f"max over the last {self.window_fraction:.0%} of terms <= {self.abs_threshold:g}, "
            f"or final value and that max <= max({self.abs_threshold:g}, {self.rel_threshold:g} * peak) "
            f"with the window nonincreasing (slack {self.monotone_slack:g}) and ending below its start"
        )


class MetrizationReport(BaseModel):
    """Traces and verdicts for the equivalent forms of convergence in W_p."""

    model_config = ConfigDict(frozen=True)

    family: str = Field(..., description="Sequence family name")
    p: float = Field(..., ge=1.0, description="Transport exponent")
    omega0: int = Field(..., ge=0, description="Base point index")
    k_grid: list[float] = Field(..., description="Tail thresholds K, increasing")
    distance_trace: list[float] = Field(..., description="Generalized W_p(P_n, P) per term")
    weak_gap_trace: list[float] = Field(..., description="Bounded test-panel gap per term")
    growth_gap_trace: list[float] = Field(..., description="Growth-bounded test-panel gap per term")
    tail_trace: list[list[float]] = Field(..., description="Tail functional per term and K")
    limit_tail: list[float] = Field(..., description="Tail functional of the limit per K")
    metric_convergence: bool = Field(..., description="W_p(P_n, P) tends to 0")
    growth_convergence: bool = Field(..., description="Expectations converge on growth-bounded functions")
    weak_convergence: bool = Field(..., description="Expectations converge on bounded functions")
    tail_condition: bool = Field(..., description="Uniform tail condition at the largest K")
    weak_with_tails: bool = Field(..., description="Weak convergence together with the tail condition")
    consistent: bool = Field(..., description="The three equivalent statements agree")
    rule: str = Field(..., description="Convergence rule applied to each trace")
    note: str = Field(default="", description="Caveats about finite evidence")

    @model_validator(mode="after")
    def _check_traces(self) -> "MetrizationReport":
        lengths = {len(self.distance_trace), len(self.weak_gap_trace), len(self.growth_gap_trace), len(self.tail_trace)}
        if len(lengths) != 1:
            raise DimensionMismatch("traces must have one entry per term")
        return self


class PEquivalenceReport(BaseModel):
    """Whether W_p and W_q convergence agree on a sequence.

    ``agree`` compares the two verdicts as they stand. The equivalence itself
    is only claimed (``equivalence_confirmed``) when the tail condition for
    the larger exponent holds as well.
    """

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., ge=1.0)
    q: float = Field(..., ge=1.0)
    p_trace: list[float] = Field(..., description="Generalized W_p per term")
    q_trace: list[float] = Field(..., description="Generalized W_q per term")
    p_converges: bool = Field(..., description="W_p trace tends to 0")
    q_converges: bool = Field(..., description="W_q trace tends to 0")
    tail_condition: bool = Field(..., description="Tail condition for the larger exponent")
    agree: bool = Field(..., description="Both traces converge or neither does")
    equivalence_confirmed: bool = Field(..., description="Tail condition holds and the verdicts agree")


class SemicontinuityResult(BaseModel):
    """Upper-probability semicontinuity on one closed set and its open complement."""

    model_config = ConfigDict(frozen=True)

    subset: list[int] = Field(..., description="Closed set F")
    limsup_proxy: float = Field(..., description="Window max of upper probability of F along the sequence")
    limit_value: float = Field(..., description="Upper probability of F under the limit")
    passed: bool = Field(..., description="limsup <= limit value (+1e-6)")
    open_liminf_proxy: float = Field(..., description="Window min of lower probability of the complement")
    open_limit_value: float = Field(..., description="Lower probability of the complement under the limit")
    open_passed: bool = Field(..., description="liminf >= limit value (-1e-6)")


class TailTransferCheck(BaseModel):
    """One term of the bound moving tail mass across a W_p-close pair of sets."""

    model_config = ConfigDict(frozen=True)

    term: int = Field(..., ge=1, description="1-based term index")
    lhs: float = Field(..., description="Tail of the term at K")
    rhs: float = Field(..., description="Bound from the limit's tail at K/2 and W_p")
    holds: bool = Field(..., description="lhs <= rhs within tolerance")
