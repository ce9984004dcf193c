"""Result models returned by the transport and ambiguity-set operations."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ambiset.errors import DimensionMismatch, InvalidWeights, ValidationFailure
from ambiset.models.arrays import FloatArray, FloatVector
from ambiset.models.measures import TestFunction

# Reported mixtures may carry this much rounding in their total.
MIXTURE_SUM_TOLERANCE = 1e-9
LIPSCHITZ_SLACK = 1e-9


def _check_mixture(weights: FloatVector, name: str) -> None:
    if weights.ndim != 1 or weights.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a nonempty vector")
    if np.any(weights < -1e-12) or abs(float(weights.sum()) - 1.0) > MIXTURE_SUM_TOLERANCE:
        raise InvalidWeights(f"{name} is not a probability vector: {weights.tolist()!r}")


class TransportPlan(BaseModel):
    """A coupling realizing ``W_p`` between two measures on one space."""

    model_config = ConfigDict(frozen=True)

    plan: FloatArray = Field(..., description="n x n coupling; rows follow the source, columns the target")
    cost_exponent: float = Field(..., ge=1.0, description="Transport exponent p")
    value: float = Field(..., ge=0.0, description="W_p after the 1/p-th root")

    @model_validator(mode="after")
    def _check_plan(self) -> "TransportPlan":
        if self.plan.ndim != 2 or self.plan.shape[0] != self.plan.shape[1]:
            raise DimensionMismatch(f"plan must be square, got shape {self.plan.shape}")
        if np.any(self.plan < 0):
            raise ValidationFailure("plan entries must be nonnegative")
        return self

    def marginals(self) -> tuple[FloatVector, FloatVector]:
        """Row and column sums."""
        return self.plan.sum(axis=1), self.plan.sum(axis=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransportPlan):
            return NotImplemented
        return (
            self.cost_exponent == other.cost_exponent
            and self.value == other.value
            and bool(np.array_equal(self.plan, other.plan))
        )

    __hash__ = None  # type: ignore[assignment]


class KantorovichPotential(BaseModel):
    """A 1-Lipschitz function attaining the Kantorovich-Rubinstein dual."""

    model_config = ConfigDict(frozen=True)

    phi: TestFunction = Field(..., description="Optimal test function, normalized so phi(0) = 0")

    @model_validator(mode="after")
    def _check_lipschitz(self) -> "KantorovichPotential":
        constant = self.phi.lipschitz_constant
        if constant > 1.0 + LIPSCHITZ_SLACK:
            raise ValidationFailure(f"potential has Lipschitz constant {constant!r} > 1")
        return self


class DirectedDistanceReport(BaseModel):
    """One sup-inf term of the generalized Wasserstein distance."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0, description="sup over the source of inf over the target of W_p")
    witness_generator: int = Field(..., ge=0, description="Source generator attaining the supremum")
    witness_mixture: FloatArray = Field(..., description="Target mixture attaining the inner infimum")
    source_mixture: FloatArray | None = Field(
        default=None, description="Maximizing source mixture when the supremum is not attained at a generator"
    )
    upper_bound: float | None = Field(
        default=None, description="Bound min_j max_i W_p(mu_i, nu_j) when the value comes from a search"
    )
    exact: bool = Field(default=True, description="False when value is only a lower bound on the supremum")

    @model_validator(mode="after")
    def _check_mixtures(self) -> "DirectedDistanceReport":
        _check_mixture(self.witness_mixture, "witness_mixture")
        if self.source_mixture is not None:
            _check_mixture(self.source_mixture, "source_mixture")
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedDistanceReport):
            return NotImplemented
        same_source = (self.source_mixture is None and other.source_mixture is None) or (
            self.source_mixture is not None
            and other.source_mixture is not None
            and bool(np.array_equal(self.source_mixture, other.source_mixture))
        )
        return (
            self.value == other.value
            and self.witness_generator == other.witness_generator
            and bool(np.array_equal(self.witness_mixture, other.witness_mixture))
            and same_source
            and self.upper_bound == other.upper_bound
            and self.exact == other.exact
        )

    __hash__ = None  # type: ignore[assignment]


class GeneralizedDistanceReport(BaseModel):
    """Both directed terms, their maximum, and optionally the dual value."""

    model_config = ConfigDict(frozen=True)

    forward: DirectedDistanceReport = Field(..., description="Directed distance P1 -> P2")
    backward: DirectedDistanceReport = Field(..., description="Directed distance P2 -> P1")
    value: float = Field(..., ge=0.0, description="max(forward, backward)")
    p: float = Field(..., ge=1.0, description="Transport exponent")
    dual_value: float | None = Field(default=None, description="Lipschitz-dual value (p = 1 only)")

    @property
    def exact(self) -> bool:
        """Both directed terms are exact rather than search lower bounds."""
        return self.forward.exact and self.backward.exact

    @model_validator(mode="after")
    def _check_value(self) -> "GeneralizedDistanceReport":
        if self.value != max(self.forward.value, self.backward.value):
            raise ValidationFailure("value must equal the larger directed distance")
        return self


class DualDistanceReport(BaseModel):
    """Supremum of ``|E^P1[phi] - E^P2[phi]|`` over 1-Lipschitz ``phi``."""

    model_config = ConfigDict(frozen=True)

    forward: float = Field(..., ge=0.0, description="sup of E^P1[phi] - E^P2[phi]")
    backward: float = Field(..., ge=0.0, description="sup of E^P2[phi] - E^P1[phi]")
    value: float = Field(..., ge=0.0, description="max(forward, backward)")
    witness_generator: int = Field(..., ge=0, description="Generator of the larger side attaining its supremum")
    witness: TestFunction = Field(..., description="1-Lipschitz function attaining the larger side")


class MembershipReport(BaseModel):
    """Hull membership of a single measure, certified from both sides of the minimax identity."""

    model_config = ConfigDict(frozen=True)

    member: bool = Field(..., description="True when the transport gap is at most the membership tolerance")
    gap: float = Field(..., ge=0.0, description="inf over the hull of W_1(mu, nu)")
    dual_gap: float = Field(..., ge=0.0, description="sup over 1-Lipschitz phi of E_mu[phi] - E^P[phi]")
    mixture: FloatArray = Field(..., description="Hull mixture closest to the measure")


class CounterexampleReport(BaseModel):
    """Generalized distance and dual value for a two-point set against its hull."""

    model_config = ConfigDict(frozen=True)

    w1: float = Field(..., description="Generalized W_1 between the raw set and its hull")
    dual: float = Field(..., description="Lipschitz-dual value between the two sets")
    distance: float = Field(default=1.0, gt=0.0, description="Distance between the two points")
    convexify_both: bool = Field(default=False, description="Whether the first set was convexified too")
