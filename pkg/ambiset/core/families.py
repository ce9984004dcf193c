"""Named sequence families used by the convergence experiments.

Every family lives on one fixed finite space large enough to hold all of its
supports, so each term is exactly computable.
"""

from collections.abc import Callable

import numpy as np

from ambiset.core.ground_space import from_points
from ambiset.errors import InvalidThreshold, UsageError
from ambiset.models.arrays import FloatVector
from ambiset.models.convergence import SetSequence
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure
from ambiset.models.space import FiniteMetricSpace

DEFAULT_SEED = 42


def _check_terms(n_terms: int) -> None:
    if n_terms < 1:
        raise InvalidThreshold(f"a sequence needs at least one term, got {n_terms}")


def _line(coordinates: list[float]) -> FiniteMetricSpace:
    ordered = sorted(coordinates)
    return from_points(ordered, 1.0, labels=[repr(x) for x in ordered])


def _diracs(space: FiniteMetricSpace, indices: list[int], convexify: bool = True) -> AmbiguitySet:
    return AmbiguitySet(
        space=space, generators=[DiscreteMeasure.dirac(space, i) for i in indices], convexify=convexify
    )


def perturbation_level(n: int) -> float:
    """Mixing weight ``2^(-n/2)`` of the n-th perturbed term."""
    return float(2.0 ** (-n / 2.0))


def shrinking(n_terms: int, grid_size: int = 200) -> SetSequence:
    """``P_n = conv{delta_(1/n), delta_(1+1/n)}`` converging to ``conv{delta_0, delta_1}``.

    The line grid holds 0, 1 and every ``1/n`` and ``1 + 1/n``; it is padded
    with the integers 3, 4, ... up to ``grid_size`` points.
    """
    _check_terms(n_terms)
    needed = {0.0, 1.0}
    for n in range(1, n_terms + 1):
        needed.add(1.0 / n)
        needed.add(1.0 + 1.0 / n)
    if len(needed) > grid_size:
        raise InvalidThreshold(f"grid of {grid_size} points cannot hold the {len(needed)} support points")
    coordinates = sorted(needed) + [float(3 + i) for i in range(grid_size - len(needed))]
    space = _line(coordinates)
    position = {float(label): index for index, label in enumerate(space.points)}

    terms = [_diracs(space, [position[1.0 / n], position[1.0 + 1.0 / n]]) for n in range(1, n_terms + 1)]
    return SetSequence(name="shrinking", space=space, terms=terms, limit=_diracs(space, [position[0.0], position[1.0]]))


def escaping(n_terms: int) -> SetSequence:
    """``P_n = {delta_n}`` on the grid ``{0, ..., N}``; mass runs off to the far end instead of converging to ``delta_0``."""
    _check_terms(n_terms)
    space = _line([float(x) for x in range(n_terms + 1)])
    terms = [_diracs(space, [n]) for n in range(1, n_terms + 1)]
    return SetSequence(name="escaping", space=space, terms=terms, limit=_diracs(space, [0]))


def alternating(n_terms: int, grid_size: int = 2) -> SetSequence:
    """``P_n = {delta_(n mod 2)}`` against the limit ``{delta_0}``."""
    _check_terms(n_terms)
    if grid_size < 2:
        raise InvalidThreshold(f"alternating needs at least two points, got {grid_size}")
    space = _line([float(x) for x in range(grid_size)])
    terms = [_diracs(space, [n % 2]) for n in range(1, n_terms + 1)]
    return SetSequence(name="alternating", space=space, terms=terms, limit=_diracs(space, [0]))


def _random_base(grid_size: int, seed: int, generators: int) -> tuple[np.random.Generator, AmbiguitySet]:
    if grid_size < 2 or generators < 1:
        raise InvalidThreshold("random families need at least two points and one generator")
    rng = np.random.default_rng(seed)
    space = from_points(rng.random((grid_size, 2)), 2.0)
    weights = rng.dirichlet(np.ones(grid_size), size=generators)
    return rng, AmbiguitySet.from_weights(space, weights)


def _blend(limit: AmbiguitySet, anchor: FloatVector, n_terms: int) -> list[AmbiguitySet]:
    terms = []
    for n in range(1, n_terms + 1):
        eps = perturbation_level(n)
        terms.append(AmbiguitySet.from_weights(limit.space, (1.0 - eps) * limit.weight_matrix + eps * anchor))
    return terms


def random_perturbation(
    n_terms: int, grid_size: int = 5, seed: int = DEFAULT_SEED, generators: int = 3
) -> SetSequence:
    """Generators pulled toward one seeded Dirac: ``(1 - eps_n) mu_i + eps_n rho`` with ``eps_n = 2^(-n/2)``."""
    _check_terms(n_terms)
    rng, limit = _random_base(grid_size, seed, generators)
    anchor = DiscreteMeasure.dirac(limit.space, int(rng.integers(grid_size))).weights
    return SetSequence(name="random_perturbation", space=limit.space, terms=_blend(limit, anchor, n_terms), limit=limit)


def contracting(n_terms: int, grid_size: int = 5, seed: int = DEFAULT_SEED, generators: int = 3) -> SetSequence:
    """Hulls contracted toward the limit's barycenter; every term lies inside the limit hull."""
    _check_terms(n_terms)
    _, limit = _random_base(grid_size, seed, generators)
    barycenter = limit.weight_matrix.mean(axis=0)
    return SetSequence(name="contracting", space=limit.space, terms=_blend(limit, barycenter, n_terms), limit=limit)


FAMILIES: dict[str, Callable[..., SetSequence]] = {
    "shrinking": shrinking,
    "escaping": escaping,
    "alternating": alternating,
    "random_perturbation": random_perturbation,
    "contracting": contracting,
}


def build_family(name: str, n_terms: int, grid_size: int | None = None, seed: int = DEFAULT_SEED) -> SetSequence:
    """Build a family by name; unused arguments are ignored by families that do not take them."""
    if name not in FAMILIES:
        raise UsageError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    kwargs: dict[str, int] = {}
    if grid_size is not None and name != "escaping":
        kwargs["grid_size"] = grid_size
    if name in ("random_perturbation", "contracting"):
        kwargs["seed"] = seed
    return FAMILIES[name](n_terms, **kwargs)
