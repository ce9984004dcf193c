"""Linear programming models shared by the simplex and transport solvers."""

import math
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ambiset.errors import DimensionMismatch
from ambiset.models.arrays import FloatArray

DEFAULT_TOLERANCE = 1e-9


class Relation(StrEnum):
    """Constraint relation."""

    LE = "<="
    EQ = "="
    GE = ">="


class Sense(StrEnum):
    """Optimization direction."""

    MIN = "min"
    MAX = "max"


class LpStatus(StrEnum):
    """Outcome of an LP solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Constraint(BaseModel):
    """One row ``coefficients . x (relation) rhs``."""

    model_config = ConfigDict(frozen=True)

    coefficients: FloatArray = Field(..., description="Row of constraint coefficients")
    relation: Relation = Field(default=Relation.LE, description="Relation between row and right-hand side")
    rhs: float = Field(..., description="Right-hand side")


class Bound(BaseModel):
    """Box bound on one variable; infinities mean unbounded."""

    model_config = ConfigDict(frozen=True)

    lower: float = Field(default=0.0, description="Lower bound (may be -inf)")
    upper: float = Field(default=math.inf, description="Upper bound (may be +inf)")

    @model_validator(mode="after")
    def _check_order(self) -> "Bound":
        if math.isnan(self.lower) or math.isnan(self.upper) or self.lower > self.upper:
            raise DimensionMismatch(f"invalid bound [{self.lower!r}, {self.upper!r}]")
        if self.lower == math.inf or self.upper == -math.inf:
            raise DimensionMismatch(f"empty bound [{self.lower!r}, {self.upper!r}]")
        return self


class LinearProgram(BaseModel):
    """A small dense LP: optimize ``objective . x`` subject to rows and boxes."""

    model_config = ConfigDict(frozen=True)

    objective: FloatArray = Field(..., description="Objective coefficients")
    sense: Sense = Field(default=Sense.MIN, description="Minimize or maximize")
    constraints: list[Constraint] = Field(default_factory=list, description="Linear constraint rows")
    bounds: list[Bound] | None = Field(default=None, description="Per-variable bounds; default 0 <= x < inf")

    @model_validator(mode="after")
    def _check_dimensions(self) -> "LinearProgram":
        if self.objective.ndim != 1 or self.objective.shape[0] == 0:
            raise DimensionMismatch("objective must be a nonempty vector")
        if not np.all(np.isfinite(self.objective)):
            raise DimensionMismatch("objective coefficients must be finite")
        width = self.num_variables
        for position, row in enumerate(self.constraints):
            if row.coefficients.shape != (width,):
                raise DimensionMismatch(f"constraint {position} has shape {row.coefficients.shape}, expected ({width},)")
            if not np.all(np.isfinite(row.coefficients)) or not math.isfinite(row.rhs):
                raise DimensionMismatch(f"constraint {position} has non-finite data")
        if self.bounds is not None and len(self.bounds) != width:
            raise DimensionMismatch(f"{len(self.bounds)} bounds for {width} variables")
        return self

    @property
    def num_variables(self) -> int:
        return int(self.objective.shape[0])

    def variable_bounds(self) -> list[Bound]:
        """Bounds with defaults filled in."""
        return self.bounds if self.bounds is not None else [Bound() for _ in range(self.num_variables)]


class LpSolution(BaseModel):
    """Certified result of ``solve_lp``.

    ``dual`` holds one shadow price per constraint: the rate of change of the
    optimal value with respect to that constraint's right-hand side.
    """

    model_config = ConfigDict(frozen=True)

    status: LpStatus = Field(..., description="Solve outcome")
    value: float = Field(default=math.nan, description="Optimal objective value")
    primal: FloatArray = Field(default_factory=lambda: np.zeros(0), description="Optimal point")
    dual: FloatArray = Field(default_factory=lambda: np.zeros(0), description="Shadow price per constraint")
    duality_gap: float = Field(default=math.nan, description="|primal - dual| objective certificate")
    slackness_residual: float = Field(default=math.nan, description="Complementary slackness residual")
    iterations: int = Field(default=0, description="Simplex pivots performed")

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class TransportSolution(BaseModel):
    """Optimal coupling of two marginals together with its potentials."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., description="Minimal total cost")
    plan: FloatArray = Field(..., description="n x m coupling matrix")
    row_potential: FloatArray = Field(..., description="Potential f on sources")
    col_potential: FloatArray = Field(..., description="Potential g on targets")
    iterations: int = Field(default=0, description="Network simplex pivots performed")
