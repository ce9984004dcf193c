"""Generalized Wasserstein distance between finitely generated ambiguity sets.

Convex hulls are never enumerated. Every optimization over a hull is a linear
program over mixture weights, and suprema of hull-convex quantities are taken
over generators.
"""

import math
from collections.abc import Iterator

import numpy as np
import structlog

from ambiset.core.lp import solve_lp
from ambiset.core.measures import check_exponent, check_same_space, mixture
from ambiset.core.transport import (
    lipschitz_bounds,
    lipschitz_constraints,
    mcshane_extension,
    require_optimal,
    wasserstein,
)
from ambiset.errors import NumericalBreakdown
from ambiset.models.arrays import FloatVector
from ambiset.models.lp import Bound, Constraint, LinearProgram, Relation, Sense
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure, TestFunction
from ambiset.models.reports import (
    DirectedDistanceReport,
    DualDistanceReport,
    GeneralizedDistanceReport,
    MembershipReport,
)

log = structlog.get_logger(__name__)

TIE_TOLERANCE = 1e-9
MEMBERSHIP_TOLERANCE = 1e-7
# Transport and dual sides of the minimax identity must agree this closely.
MINIMAX_TOLERANCE = 1e-6
LATTICE_BUDGET = 1000
LATTICE_MAX_RESOLUTION = 64
PATTERN_MIN_STEP = 1e-10
PATTERN_MAX_EVALUATIONS = 2000
PATTERN_STARTS = 8


def _lowest_argmax(values: FloatVector | list[float], tol: float = TIE_TOLERANCE) -> int:
    array = np.asarray(values, dtype=np.float64)
    return int(np.flatnonzero(array >= array.max() - tol)[0])


def _lowest_argmin(values: FloatVector | list[float], tol: float = TIE_TOLERANCE) -> int:
    array = np.asarray(values, dtype=np.float64)
    return int(np.flatnonzero(array <= array.min() + tol)[0])


def _one_hot(size: int, index: int) -> FloatVector:
    vector = np.zeros(size)
    vector[index] = 1.0
    return vector


def distance_to_hull(mu: DiscreteMeasure, ambiguity: AmbiguitySet, p: float = 1.0) -> tuple[float, FloatVector]:
    """``min W_p(mu, nu)`` over ``nu`` in the convex hull of the generators, with the optimal mixture.

    Solved as one LP over the coupling and the mixture weights: rows of the
    coupling sum to ``mu``, its columns to ``sum_j w_j nu_j``, and ``w`` lies
    in the simplex.
    """
    check_same_space(mu.space, ambiguity.space)
    p = check_exponent(p)
    if ambiguity.size == 1:
        value, _ = wasserstein(mu, ambiguity.generators[0], p)
        return value, np.ones(1)

    rows, cols = mu.support(), ambiguity.support()
    s, v, k = len(rows), len(cols), ambiguity.size
    cost = mu.space.dist[np.ix_(rows, cols)] ** p
    targets = ambiguity.weight_matrix[:, cols]
    width = s * v + k

    constraints: list[Constraint] = []
    for a in range(s):
        coefficients = np.zeros(width)
        coefficients[a * v : (a + 1) * v] = 1.0
        constraints.append(Constraint(coefficients=coefficients, relation=Relation.EQ, rhs=float(mu.weights[rows[a]])))
    for b in range(v):
        coefficients = np.zeros(width)
        coefficients[b : s * v : v] = 1.0
        coefficients[s * v :] = -targets[:, b]
        constraints.append(Constraint(coefficients=coefficients, relation=Relation.EQ, rhs=0.0))
    simplex_row = np.zeros(width)
    simplex_row[s * v :] = 1.0
    constraints.append(Constraint(coefficients=simplex_row, relation=Relation.EQ, rhs=1.0))

    program = LinearProgram(objective=np.concatenate([cost.ravel(), np.zeros(k)]), constraints=constraints)
    solution = require_optimal(solve_lp(program), "hull distance")
    weights = np.clip(solution.primal[s * v :], 0.0, None)
    return max(0.0, solution.value) ** (1.0 / p), weights / weights.sum()


def _raw_distance(mu: DiscreteMeasure, target: AmbiguitySet, p: float) -> tuple[float, int]:
    distances = [wasserstein(mu, nu, p)[0] for nu in target.generators]
    j = _lowest_argmin(distances)
    return distances[j], j


def _lattice(parts: int, resolution: int) -> Iterator[tuple[int, ...]]:
    """Compositions of ``resolution`` into ``parts`` nonnegative integers, lexicographically."""
    if parts == 1:
        yield (resolution,)
        return
    for head in range(resolution, -1, -1):
        for tail in _lattice(parts - 1, resolution - head):
            yield (head, *tail)


def _lattice_resolution(parts: int) -> int:
    resolution = 1
    while (
        resolution < LATTICE_MAX_RESOLUTION
        and math.comb(resolution + 1 + parts - 1, parts - 1) <= LATTICE_BUDGET
    ):
        resolution += 1
    return resolution


def _polish(
    source: AmbiguitySet, target: AmbiguitySet, p: float, start: tuple[float, int, FloatVector], resolution: int
) -> tuple[tuple[float, int, FloatVector], bool]:
    """Pattern search moving mass between pairs of generators; also reports whether the budget ran out."""
    best_value, best_target, best_weights = start
    k = source.size
    step = 1.0 / resolution
    evaluations = 0
    while step >= PATTERN_MIN_STEP:
        if evaluations >= PATTERN_MAX_EVALUATIONS:
            return (best_value, best_target, best_weights), True
        improved = False
        for a in range(k):
            for b in range(k):
                if a == b or best_weights[a] < step:
                    continue
                candidate = best_weights.copy()
                candidate[a] -= step
                candidate[b] += step
                value, j = _raw_distance(mixture(source, candidate), target, p)
                evaluations += 1
                if value > best_value + 1e-12:
                    best_value, best_target, best_weights = value, j, candidate
                    improved = True
        if not improved:
            step /= 2.0
    return (best_value, best_target, best_weights), False


def _lattice_peaks(grid: dict[tuple[int, ...], tuple[float, int, FloatVector]], k: int) -> list[tuple[int, ...]]:
    """Lattice points no lower than any neighbour reached by moving one unit between two generators."""
    peaks = []
    for point, (value, _, _) in grid.items():
        neighbours = (
            tuple(c - (i == a) + (i == b) for i, c in enumerate(point))
            for a in range(k)
            for b in range(k)
            if a != b and point[a] > 0
        )
        if all(grid[neighbour][0] <= value for neighbour in neighbours):
            peaks.append(point)
    return peaks


def _hull_against_raw(source: AmbiguitySet, target: AmbiguitySet, p: float) -> DirectedDistanceReport:
    """``max`` over the source hull of ``min_j W_p(., nu_j)``.

    The objective is not concave, so the maximum is located on a simplex
    lattice, and its local maxima (best first) are polished by a pattern search.
    ``W_p(., nu_j)`` is quasi-convex along mixtures, so
    ``min_j max_i W_p(mu_i, nu_j)`` bounds the supremum from above; when the
    search falls short of it the report is marked inexact.
    """
    k = source.size
    pairwise = np.array([[wasserstein(mu, nu, p)[0] for nu in target.generators] for mu in source.generators])
    upper = float(pairwise.max(axis=0).min())
    slack = TIE_TOLERANCE * (1.0 + upper)

    resolution = _lattice_resolution(k)
    grid: dict[tuple[int, ...], tuple[float, int, FloatVector]] = {}
    for point in _lattice(k, resolution):
        weights = np.array(point, dtype=np.float64) / resolution
        value, j = _raw_distance(mixture(source, weights), target, p)
        grid[point] = (value, j, weights)
    # stable sort: equal values keep lattice order
    starts = sorted(_lattice_peaks(grid, k), key=lambda point: -grid[point][0])
    best = grid[starts[0]]
    exhausted = False
    for start in (grid[point] for point in starts[:PATTERN_STARTS]):
        if best[0] >= upper - slack:
            break
        polished, ran_out = _polish(source, target, p, start, resolution)
        exhausted = exhausted or ran_out
        if polished[0] > best[0] + TIE_TOLERANCE:
            best = polished

    best_value, best_target, best_weights = best
    exact = best_value >= upper - slack
    if exhausted:
        log.warning("hull_search_budget_exhausted", evaluations=PATTERN_MAX_EVALUATIONS, value=best_value, upper=upper)
    if not exact:
        log.info("hull_search_lower_bound", value=best_value, upper_bound=upper, gap=upper - best_value)
    return DirectedDistanceReport(
        value=max(0.0, best_value),
        witness_generator=_lowest_argmax(best_weights),
        witness_mixture=_one_hot(target.size, best_target),
        source_mixture=best_weights,
        upper_bound=upper,
        exact=exact,
    )


def directed_distance(source: AmbiguitySet, target: AmbiguitySet, p: float = 1.0) -> DirectedDistanceReport:
    """``sup`` over the source of ``inf`` over the target of ``W_p``.

    The target's ``convexify`` flag decides whether the infimum runs over its
    hull or over its generators; the source's flag decides the same for the
    supremum.
    """
    check_same_space(source.space, target.space)
    p = check_exponent(p)

    if target.convexify:
        results = [distance_to_hull(mu, target, p) for mu in source.generators]
        i = _lowest_argmax([value for value, _ in results])
        report = DirectedDistanceReport(value=results[i][0], witness_generator=i, witness_mixture=results[i][1])
    elif not source.convexify or source.size == 1:
        inner = [_raw_distance(mu, target, p) for mu in source.generators]
        i = _lowest_argmax([value for value, _ in inner])
        report = DirectedDistanceReport(
            value=inner[i][0], witness_generator=i, witness_mixture=_one_hot(target.size, inner[i][1])
        )
    else:
        report = _hull_against_raw(source, target, p)

    log.debug(
        "directed_distance_computed",
        p=p,
        value=report.value,
        source_convex=source.convexify,
        target_convex=target.convexify,
    )
    return report


def _one_sided_dual(first: AmbiguitySet, second: AmbiguitySet) -> tuple[float, int, TestFunction]:
    """``sup`` over 1-Lipschitz ``phi`` of ``E^first[phi] - E^second[phi]``.

    One LP per generator ``mu_i`` of ``first``: maximize ``t`` subject to
    ``t <= <mu_i - nu_j, phi>`` for every generator ``nu_j`` of ``second``.
    """
    space = first.space
    support = sorted(set(first.support()) | set(second.support()))
    dist = space.dist[np.ix_(support, support)]
    r = len(support)
    lipschitz = lipschitz_constraints(dist, r + 1)
    bounds = [*lipschitz_bounds(dist), Bound(lower=0.0)]
    objective = np.zeros(r + 1)
    objective[r] = 1.0

    values: list[float] = []
    potentials: list[FloatVector] = []
    for mu in first.generators:
        rows = list(lipschitz)
        for nu in second.generators:
            coefficients = np.zeros(r + 1)
            coefficients[:r] = -(mu.weights - nu.weights)[support]
            coefficients[r] = 1.0
            rows.append(Constraint(coefficients=coefficients, relation=Relation.LE, rhs=0.0))
        program = LinearProgram(objective=objective, sense=Sense.MAX, constraints=rows, bounds=bounds)
        solution = require_optimal(solve_lp(program), "Lipschitz dual")
        values.append(max(0.0, solution.value))
        potentials.append(solution.primal[:r])

    i = _lowest_argmax(values)
    extended = mcshane_extension(space.dist, support, potentials[i])
    return values[i], i, TestFunction(space=space, values=extended - extended[0])


def dual_distance(first: AmbiguitySet, second: AmbiguitySet) -> DualDistanceReport:
    """``sup |E^P1[phi] - E^P2[phi]|`` over 1-Lipschitz ``phi``; independent of the convexify flags."""
    check_same_space(first.space, second.space)
    forward, forward_index, forward_witness = _one_sided_dual(first, second)
    backward, backward_index, backward_witness = _one_sided_dual(second, first)
    if backward > forward + TIE_TOLERANCE:
        index, witness = backward_index, backward_witness
    else:
        index, witness = forward_index, forward_witness
    return DualDistanceReport(
        forward=forward,
        backward=backward,
        value=max(forward, backward),
        witness_generator=index,
        witness=witness,
    )


def generalized_wasserstein(
    first: AmbiguitySet, second: AmbiguitySet, p: float = 1.0, with_dual: bool = False
) -> GeneralizedDistanceReport:
    """The larger of the two directed distances, optionally with the Lipschitz dual (p = 1)."""
    check_same_space(first.space, second.space)
    p = check_exponent(p)
    forward = directed_distance(first, second, p)
    backward = directed_distance(second, first, p)
    dual_value = dual_distance(first, second).value if with_dual and p == 1.0 else None
    return GeneralizedDistanceReport(
        forward=forward,
        backward=backward,
        value=max(forward.value, backward.value),
        p=p,
        dual_value=dual_value,
    )


def hull_membership(
    mu_star: DiscreteMeasure, ambiguity: AmbiguitySet, tol: float = MEMBERSHIP_TOLERANCE
) -> MembershipReport:
    """Whether ``mu_star`` lies in the hull, certified by both sides of the minimax identity."""
    check_same_space(mu_star.space, ambiguity.space)
    hull = ambiguity.with_convexify(True)
    gap, weights = distance_to_hull(mu_star, hull, 1.0)
    dual_gap, _, _ = _one_sided_dual(AmbiguitySet(space=hull.space, generators=[mu_star]), hull)
    if abs(gap - dual_gap) > MINIMAX_TOLERANCE:
        raise NumericalBreakdown(f"minimax identity failed: transport gap {gap!r} vs dual gap {dual_gap!r}")
    return MembershipReport(member=gap <= tol, gap=gap, dual_gap=dual_gap, mixture=weights)


def hull_equality(first: AmbiguitySet, second: AmbiguitySet, tol: float = MEMBERSHIP_TOLERANCE) -> bool:
    """Whether the two sets generate the same convex hull."""
    check_same_space(first.space, second.space)
    first_hull, second_hull = first.with_convexify(True), second.with_convexify(True)
    return (
        directed_distance(first_hull, second_hull, 1.0).value <= tol
        and directed_distance(second_hull, first_hull, 1.0).value <= tol
    )
