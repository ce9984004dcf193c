"""Schema of the problem files read by the command line."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ambiset.errors import SchemaViolation


class SpaceSpec(BaseModel):
    """Either an explicit distance matrix or a point cloud."""

    model_config = ConfigDict(extra="forbid")

    points: list[str] | None = Field(default=None, description="Point labels (default '0'..'n-1')")
    dist: list[list[float]] | None = Field(default=None, description="n x n distance matrix")
    coords: list[list[float]] | list[float] | None = Field(default=None, description="Point cloud")
    q: float = Field(default=2.0, description="Norm exponent for coords")

    @model_validator(mode="after")
    def _one_source(self) -> "SpaceSpec":
        if (self.dist is None) == (self.coords is None):
            raise SchemaViolation("space needs exactly one of 'dist' or 'coords'")
        return self


class MeasureSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weights: list[float] = Field(..., description="Probability mass per point")


class SetSpec(BaseModel):
    """Generators given inline as weight rows or by measure name."""

    model_config = ConfigDict(extra="forbid")

    generators: list[list[float] | str] = Field(..., description="Weight rows or measure names")
    convexify: bool = Field(default=True, description="Interpret as the convex hull")


class FunctionSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    values: list[float] = Field(..., description="Function value per point")


class SequenceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    terms: list[str] = Field(..., description="Set names, in order")
    limit: str = Field(..., description="Set name of the candidate limit")


class ProblemOptions(BaseModel):
    """Per-file defaults; flags and environment variables still win."""

    model_config = ConfigDict(extra="forbid")

    p: float | None = Field(default=None, ge=1.0, description="Transport exponent")
    tol: float | None = Field(default=None, gt=0.0, description="Decision tolerance for membership and hull equality")
    seed: int | None = Field(default=None, description="Seed for random panels")


class ProblemFile(BaseModel):
    """A space plus named measures, sets, functions and sequences on it."""

    model_config = ConfigDict(extra="forbid")

    space: SpaceSpec = Field(..., description="Ground space")
    measures: dict[str, MeasureSpec] = Field(default_factory=dict)
    sets: dict[str, SetSpec] = Field(default_factory=dict)
    functions: dict[str, FunctionSpec] = Field(default_factory=dict)
    sequences: dict[str, SequenceSpec] = Field(default_factory=dict)
    options: ProblemOptions = Field(default_factory=ProblemOptions)
