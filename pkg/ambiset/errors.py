"""Exception hierarchy for ambiset.

Errors do not subclass ``ValueError`` so that raising them inside pydantic
validators propagates the original type instead of a ``ValidationError``.
"""


class AmbisetError(Exception):
    """Base class for every error raised by ambiset."""


class ValidationFailure(AmbisetError):
    """Input data violates a documented invariant."""


class AsymmetricDistance(ValidationFailure):
    """The distance matrix is not symmetric."""

    def __init__(self, i: int, j: int, forward: float, backward: float):
        self.i = i
        self.j = j
        self.forward = forward
        self.backward = backward
        super().__init__(f"dist[{i}][{j}]={forward!r} differs from dist[{j}][{i}]={backward!r}")


class TriangleViolation(ValidationFailure):
    """``dist[i][j] > dist[i][k] + dist[k][j]`` for the reported triple."""

    def __init__(self, i: int, j: int, k: int, direct: float, detour: float):
        self.i = i
        self.j = j
        self.k = k
        self.direct = direct
        self.detour = detour
        super().__init__(
            f"triangle inequality fails on ({i},{j}) via {k}: "
            f"dist[{i}][{j}]={direct!r} > dist[{i}][{k}]+dist[{k}][{j}]={detour!r}"
        )

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.i, self.j, self.k)


class NonzeroDiagonal(ValidationFailure):
    """A point has nonzero distance to itself."""

    def __init__(self, i: int, value: float):
        self.i = i
        self.value = value
        super().__init__(f"dist[{i}][{i}]={value!r} is not zero")


class DuplicatePoints(ValidationFailure):
    """Two distinct indices describe the same point."""

    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"points {i} and {j} coincide (zero distance)")


class DimensionMismatch(ValidationFailure):
    """Array shapes do not agree."""


class NonpositiveScale(ValidationFailure):
    """A scale factor is not strictly positive."""


class InvalidWeights(ValidationFailure):
    """Weights are negative, non-finite, or do not sum to one."""


class SpaceMismatch(ValidationFailure):
    """Two objects live on different ground spaces."""


class InvalidExponent(ValidationFailure):
    """A transport exponent is not a finite real >= 1."""


class InvalidIndex(ValidationFailure):
    """A point or generator index is out of range."""


class InvalidThreshold(ValidationFailure):
    """A level, cap or threshold is outside its admissible range."""


class EmptyPanel(ValidationFailure):
    """A test-function panel has no members."""


class EmptySet(ValidationFailure):
    """An ambiguity set or sequence has no members."""


class MarginalMismatch(ValidationFailure):
    """Transport marginals are negative or carry different total mass."""


class SchemaViolation(ValidationFailure):
    """An input document does not follow its schema."""


class UnresolvedName(SchemaViolation):
    """A problem file references an entity that is not defined."""


class NumericalBreakdown(AmbisetError):
    """A solver lost numerical control or an internal certificate failed."""


class UsageError(AmbisetError):
    """The command line is malformed."""


class UnknownCommand(UsageError):
    """The requested subcommand does not exist."""
