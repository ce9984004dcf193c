"""Loading problem files and resolving the names they define."""

import json
from pathlib import Path
from typing import Any

import structlog
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ambiset.core.ground_space import DEFAULT_LENIENT_TOLERANCE, ValidationMode, from_points, validate_space
from ambiset.errors import SchemaViolation, UnresolvedName
from ambiset.models.convergence import SetSequence
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure, TestFunction
from ambiset.models.problem import ProblemFile, ProblemOptions, SpaceSpec
from ambiset.models.space import FiniteMetricSpace

log = structlog.get_logger(__name__)


class ResolvedProblem(BaseModel):
    """A problem file with every name turned into a validated domain object."""

    model_config = ConfigDict(frozen=True)

    space: FiniteMetricSpace = Field(..., description="Validated ground space")
    measures: dict[str, DiscreteMeasure] = Field(default_factory=dict)
    sets: dict[str, AmbiguitySet] = Field(default_factory=dict)
    functions: dict[str, TestFunction] = Field(default_factory=dict)
    sequences: dict[str, SetSequence] = Field(default_factory=dict)
    options: ProblemOptions = Field(default_factory=ProblemOptions)

    def measure(self, name: str) -> DiscreteMeasure:
        if name not in self.measures:
            raise UnresolvedName(f"no measure named {name!r}")
        return self.measures[name]

    def ambiguity_set(self, name: str) -> AmbiguitySet:
        """A named set; a measure name is accepted as the singleton set."""
        if name in self.sets:
            return self.sets[name]
        if name in self.measures:
            return AmbiguitySet(space=self.space, generators=[self.measures[name]])
        raise UnresolvedName(f"no set or measure named {name!r}")

    def function(self, name: str) -> TestFunction:
        if name not in self.functions:
            raise UnresolvedName(f"no function named {name!r}")
        return self.functions[name]

    def sequence(self, name: str) -> SetSequence:
        if name not in self.sequences:
            raise UnresolvedName(f"no sequence named {name!r}")
        return self.sequences[name]


def build_space(
    spec: SpaceSpec,
    mode: ValidationMode | str = ValidationMode.STRICT,
    tolerance: float = DEFAULT_LENIENT_TOLERANCE,
) -> FiniteMetricSpace:
    """Validate an explicit matrix, or build the l_q metric of a point cloud."""
    if spec.dist is not None:
        return validate_space(spec.dist, mode, tolerance, labels=spec.points)
    return from_points(spec.coords, spec.q, labels=spec.points)


def summarize_validation_error(exc: ValidationError) -> str:
    """One line: the first failing location and message, plus a count of the rest."""
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<root>"
    return f"{location}: {first['msg']}" + (f" (+{exc.error_count() - 1} more)" if exc.error_count() > 1 else "")


def parse_problem(
    data: Any,
    mode: ValidationMode | str = ValidationMode.STRICT,
    tolerance: float = DEFAULT_LENIENT_TOLERANCE,
) -> ResolvedProblem:
    """Validate ``data`` against the problem schema and resolve every name.

    A bare space object (``dist`` or ``coords`` at the top level) is accepted
    as a problem holding only that space.
    """
    if isinstance(data, dict) and "space" not in data and ("dist" in data or "coords" in data):
        data = {"space": data}
    try:
        problem = ProblemFile.model_validate(data)
    except ValidationError as exc:
        raise SchemaViolation(summarize_validation_error(exc)) from exc

    space = build_space(problem.space, mode, tolerance)
    measures = {name: DiscreteMeasure(space=space, weights=spec.weights) for name, spec in problem.measures.items()}

    sets: dict[str, AmbiguitySet] = {}
    for name, set_spec in problem.sets.items():
        generators = []
        for entry in set_spec.generators:
            if isinstance(entry, str):
                if entry not in measures:
                    raise UnresolvedName(f"set {name!r} references unknown measure {entry!r}")
                generators.append(measures[entry])
            else:
                generators.append(DiscreteMeasure(space=space, weights=entry))
        sets[name] = AmbiguitySet(space=space, generators=generators, convexify=set_spec.convexify)

    functions = {name: TestFunction(space=space, values=spec.values) for name, spec in problem.functions.items()}

    sequences: dict[str, SetSequence] = {}
    for name, sequence_spec in problem.sequences.items():
        missing = [ref for ref in [*sequence_spec.terms, sequence_spec.limit] if ref not in sets]
        if missing:
            raise UnresolvedName(f"sequence {name!r} references unknown sets {missing!r}")
        sequences[name] = SetSequence(
            name=name,
            space=space,
            terms=[sets[ref] for ref in sequence_spec.terms],
            limit=sets[sequence_spec.limit],
        )

    log.debug("problem_resolved", points=space.size, measures=len(measures), sets=len(sets))
    return ResolvedProblem(
        space=space,
        measures=measures,
        sets=sets,
        functions=functions,
        sequences=sequences,
        options=problem.options,
    )


def load_problem(
    path: Path,
    mode: ValidationMode | str = ValidationMode.STRICT,
    tolerance: float = DEFAULT_LENIENT_TOLERANCE,
) -> ResolvedProblem:
    """Read a JSON (or YAML, by suffix) problem file."""
    if not path.exists():
        raise FileNotFoundError(f"Problem file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text) if path.suffix in (".yml", ".yaml") else json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise SchemaViolation(f"{path} is not well-formed: {exc}") from exc
    return parse_problem(data, mode, tolerance)
