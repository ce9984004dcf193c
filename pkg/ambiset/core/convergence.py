"""Sequence-level experiments: weak convergence, metrization, tails and semicontinuity.

Limits are judged on finite evidence through a ``ConvergenceRule``; the rule
is written into every report.
"""

import itertools
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np
import structlog

from ambiset.core.ambiguity import dual_distance, generalized_wasserstein
from ambiset.core.ground_space import radius
from ambiset.core.measures import check_exponent, lower_probability, tail_functional, upper_probability
from ambiset.errors import EmptyPanel, InvalidThreshold, NonpositiveScale, NumericalBreakdown, SpaceMismatch
from ambiset.models.arrays import FloatVector
from ambiset.models.convergence import (
    ConvergenceRule,
    MetrizationReport,
    PEquivalenceReport,
    SemicontinuityResult,
    SetSequence,
    TailTransferCheck,
)
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure, TestFunction, check_indices
from ambiset.models.reports import CounterexampleReport
from ambiset.models.space import BasePoint, FiniteMetricSpace

log = structlog.get_logger(__name__)

DEFAULT_SEED = 42
DEFAULT_PANEL_SIZE = 64
DEFAULT_GROWTH_PANEL_SIZE = 16
SEMICONTINUITY_TOLERANCE = 1e-6
COUNTEREXAMPLE_TOLERANCE = 1e-9
RANDOM_ANCHORS = 3
GROWTH_SCALE = 0.1

T = TypeVar("T")
R = TypeVar("R")


def _map(func: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    """Ordered map, threaded when ``workers > 1``."""
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _random_lipschitz(space: FiniteMetricSpace, rng: np.random.Generator, count: int) -> list[FloatVector]:
    """Seeded 1-Lipschitz functions with values in [-1, 1].

    Each is a lower envelope of cones ``offset + d(anchor, .)`` (a McShane
    extension), optionally negated, then clipped.
    """
    functions = []
    for _ in range(count):
        anchors = rng.choice(space.size, size=min(RANDOM_ANCHORS, space.size), replace=False)
        offsets = rng.uniform(-1.0, 1.0, size=anchors.shape[0])
        envelope = np.min(offsets[:, None] + space.dist[anchors], axis=0)
        sign = rng.choice([-1.0, 1.0])
        functions.append(np.clip(sign * envelope, -1.0, 1.0))
    return functions


def lipschitz_panel(
    space: FiniteMetricSpace, seed: int = DEFAULT_SEED, size: int = DEFAULT_PANEL_SIZE
) -> list[TestFunction]:
    """Capped distances ``min(d(i, .), 1)`` for every point plus ``size`` seeded random 1-Lipschitz functions."""
    panel = [TestFunction.distance_to(space, i, cap=1.0) for i in range(space.size)]
    rng = np.random.default_rng(seed)
    panel.extend(TestFunction(space=space, values=v) for v in _random_lipschitz(space, rng, size))
    return panel


def indicator_panel(
    space: FiniteMetricSpace, seed: int = DEFAULT_SEED, size: int = DEFAULT_PANEL_SIZE
) -> list[TestFunction]:
    """Indicators of every singleton plus ``size`` seeded random 1-Lipschitz functions."""
    panel = [TestFunction.indicator(space, [i]) for i in range(space.size)]
    rng = np.random.default_rng(seed)
    panel.extend(TestFunction(space=space, values=v) for v in _random_lipschitz(space, rng, size))
    return panel


def growth_panel(
    space: FiniteMetricSpace,
    omega0: BasePoint | None = None,
    p: float = 1.0,
    seed: int = DEFAULT_SEED,
    size: int = DEFAULT_GROWTH_PANEL_SIZE,
) -> list[TestFunction]:
    """Functions bounded by ``C (1 + d(omega0, .)^p)``: the growth function itself, its negative, and seeded products."""
    p = check_exponent(p)
    growth = space.distances_from((omega0 or BasePoint()).resolve(space)) ** p
    panel = [TestFunction(space=space, values=growth), TestFunction(space=space, values=-growth)]
    rng = np.random.default_rng(seed)
    panel.extend(
        TestFunction(space=space, values=GROWTH_SCALE * psi * (1.0 + growth))
        for psi in _random_lipschitz(space, rng, size)
    )
    return panel


def default_k_grid(space: FiniteMetricSpace, omega0: BasePoint | None = None) -> list[float]:
    """Quarter, half and three quarters of the radius around ``omega0``."""
    r = radius(space, omega0)
    return [r / 4.0, r / 2.0, 3.0 * r / 4.0] if r > 0 else [0.0]


def check_k_grid(k_grid: Sequence[float]) -> list[float]:
    grid = [float(k) for k in k_grid]
    if not grid:
        raise InvalidThreshold("K grid must not be empty")
    if any(k < 0 or not np.isfinite(k) for k in grid) or any(b <= a for a, b in itertools.pairwise(grid)):
        raise InvalidThreshold(f"K grid must be finite, nonnegative and increasing, got {grid!r}")
    return grid


def weak_convergence_gap(seq: SetSequence, panel: Sequence[TestFunction]) -> list[float]:
    """Per term, ``max`` over the panel of ``|E^(P_n)[phi] - E^P[phi]|``."""
    if not panel:
        raise EmptyPanel("test-function panel is empty")
    for phi in panel:
        if not phi.space.same_as(seq.space):
            raise SpaceMismatch("panel function lives on a different space")
    values = np.vstack([phi.values for phi in panel]).T

    def upper(ambiguity: AmbiguitySet) -> FloatVector:
        return (ambiguity.weight_matrix @ values).max(axis=0)

    reference = upper(seq.limit)
    return [float(np.abs(upper(term) - reference).max()) for term in seq.terms]


def distance_trace(seq: SetSequence, p: float = 1.0, workers: int = 1) -> list[float]:
    """Generalized ``W_p(P_n, P)`` per term."""
    p = check_exponent(p)
    return _map(lambda term: generalized_wasserstein(term, seq.limit, p).value, seq.terms, workers)


def _tail_matrix(seq: SetSequence, omega0: BasePoint, p: float, k_grid: Sequence[float]) -> list[list[float]]:
    return [[tail_functional(term, omega0, p, k) for k in k_grid] for term in seq.terms]


def _tail_condition(column: Sequence[float], limit_value: float, rule: ConvergenceRule) -> bool:
    """Limsup proxy of the tail at one K does not exceed the limit's tail (within the rule's threshold)."""
    excess = [max(0.0, value - limit_value) for value in column]
    return rule.limsup_proxy(excess) <= rule.threshold(column)


def metrization_report(
    seq: SetSequence,
    p: float = 1.0,
    k_grid: Sequence[float] | None = None,
    omega0: BasePoint | None = None,
    panel: Sequence[TestFunction] | None = None,
    rule: ConvergenceRule | None = None,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> MetrizationReport:
    """Traces and verdicts for convergence in W_p, on growth-bounded functions, and weakly with tails."""
    p = check_exponent(p)
    omega0 = omega0 or BasePoint()
    omega0.resolve(seq.space)
    rule = rule or ConvergenceRule()
    grid = check_k_grid(k_grid if k_grid is not None else default_k_grid(seq.space, omega0))
    bounded_panel = panel if panel is not None else lipschitz_panel(seq.space, seed)

    distances = distance_trace(seq, p, workers)
    weak_gaps = weak_convergence_gap(seq, bounded_panel)
    growth_gaps = weak_convergence_gap(seq, growth_panel(seq.space, omega0, p, seed))
    tails = _tail_matrix(seq, omega0, p, grid)
    limit_tail = [tail_functional(seq.limit, omega0, p, k) for k in grid]

    metric = rule.tends_to_zero(distances)
    growth = rule.tends_to_zero(growth_gaps)
    weak = rule.tends_to_zero(weak_gaps)
    tail_ok = _tail_condition([row[-1] for row in tails], limit_tail[-1], rule)
    with_tails = weak and tail_ok
    consistent = metric == growth == with_tails

    log.info(
        "metrization_report_built",
        family=seq.name,
        terms=len(seq),
        p=p,
        metric=metric,
        growth=growth,
        weak_with_tails=with_tails,
        consistent=consistent,
    )
    if not consistent:
        log.warning("metrization_verdicts_disagree", family=seq.name, p=p)
    return MetrizationReport(
        family=seq.name,
        p=p,
        omega0=omega0.index,
        k_grid=grid,
        distance_trace=distances,
        weak_gap_trace=weak_gaps,
        growth_gap_trace=growth_gaps,
        tail_trace=tails,
        limit_tail=limit_tail,
        metric_convergence=metric,
        growth_convergence=growth,
        weak_convergence=weak,
        tail_condition=tail_ok,
        weak_with_tails=with_tails,
        consistent=consistent,
        rule=rule.describe(),
        note=(
            f"verdicts judge {len(seq)} terms; the tail condition is judged at K={grid[-1]:g} "
            "and no extrapolation beyond the last term is made"
        ),
    )


def p_equivalence_check(
    seq: SetSequence,
    p: float,
    q: float,
    omega0: BasePoint | None = None,
    k_grid: Sequence[float] | None = None,
    rule: ConvergenceRule | None = None,
    workers: int = 1,
) -> PEquivalenceReport:
    """Whether ``W_p`` and ``W_q`` convergence agree, with the tail condition for the larger exponent."""
    p, q = check_exponent(p), check_exponent(q)
    omega0 = omega0 or BasePoint()
    rule = rule or ConvergenceRule()
    grid = check_k_grid(k_grid if k_grid is not None else default_k_grid(seq.space, omega0))

    p_trace = distance_trace(seq, p, workers)
    q_trace = distance_trace(seq, q, workers)
    larger = max(p, q)
    column = [tail_functional(term, omega0, larger, grid[-1]) for term in seq.terms]
    tail_ok = _tail_condition(column, tail_functional(seq.limit, omega0, larger, grid[-1]), rule)

    p_converges, q_converges = rule.tends_to_zero(p_trace), rule.tends_to_zero(q_trace)
    agree = p_converges == q_converges
    if tail_ok and not agree:
        log.warning("p_equivalence_contradicted", family=seq.name, p=p, q=q)
    return PEquivalenceReport(
        p=p,
        q=q,
        p_trace=p_trace,
        q_trace=q_trace,
        p_converges=p_converges,
        q_converges=q_converges,
        tail_condition=tail_ok,
        agree=agree,
        equivalence_confirmed=tail_ok and agree,
    )


def all_subsets(space: FiniteMetricSpace) -> list[list[int]]:
    """Every subset of the point indices, smallest first."""
    indices = range(space.size)
    return [list(c) for size in range(space.size + 1) for c in itertools.combinations(indices, size)]


def semicontinuity_check(
    seq: SetSequence, subsets: Iterable[Iterable[int]], rule: ConvergenceRule | None = None
) -> list[SemicontinuityResult]:
    """``limsup upper(P_n, F) <= upper(P, F)`` per subset, with the equivalent open-set form on the complement."""
    rule = rule or ConvergenceRule()
    results = []
    for subset in subsets:
        closed = check_indices(seq.space, subset)
        complement = sorted(set(range(seq.space.size)) - set(closed))
        upper_trace = [upper_probability(term, closed) for term in seq.terms]
        lower_trace = [lower_probability(term, complement) for term in seq.terms]
        limit_value = upper_probability(seq.limit, closed)
        open_limit = lower_probability(seq.limit, complement)
        limsup = rule.limsup_proxy(upper_trace)
        liminf = rule.liminf_proxy(lower_trace)
        results.append(
            SemicontinuityResult(
                subset=closed,
                limsup_proxy=limsup,
                limit_value=limit_value,
                passed=limsup <= limit_value + SEMICONTINUITY_TOLERANCE,
                open_liminf_proxy=liminf,
                open_limit_value=open_limit,
                open_passed=liminf >= open_limit - SEMICONTINUITY_TOLERANCE,
            )
        )
    return results


def tail_transfer_check(
    seq: SetSequence, p: float, level: float, omega0: BasePoint | None = None
) -> list[TailTransferCheck]:
    """Per term: ``tail(P_n, K) <= 2^(p-1) tail(P, K/2) + 2^(2p-1) W_p(P_n, P)^p``."""
    p = check_exponent(p)
    omega0 = omega0 or BasePoint()
    limit_half = tail_functional(seq.limit, omega0, p, level / 2.0)
    checks = []
    for n, term in enumerate(seq.terms, start=1):
        lhs = tail_functional(term, omega0, p, level)
        distance = generalized_wasserstein(term, seq.limit, p).value
        rhs = 2.0 ** (p - 1.0) * limit_half + 2.0 ** (2.0 * p - 1.0) * distance**p
        checks.append(TailTransferCheck(term=n, lhs=lhs, rhs=rhs, holds=lhs <= rhs + 1e-9 * (1.0 + rhs)))
    return checks


def base_point_independence(
    ambiguity: AmbiguitySet,
    p: float = 1.0,
    k_grid: Sequence[float] | None = None,
    omega0: BasePoint | None = None,
) -> bool:
    """Check that tails seen from any point are controlled by tails seen from ``omega0``.

    For ``c = d(omega0, w)`` and ``K > c``:
    ``tail_w(K) <= 2^(p-1) (1 + (c / (K - c))^p) tail_omega0(K - c)``.
    """
    p = check_exponent(p)
    omega0 = omega0 or BasePoint()
    space = ambiguity.space
    r = radius(space, omega0)
    grid = check_k_grid(k_grid if k_grid is not None else [r / 4.0, r / 2.0, 3.0 * r / 4.0, r] if r > 0 else [0.0])
    origin = space.distances_from(omega0.resolve(space))
    for w in range(space.size):
        c = float(origin[w])
        for k in grid:
            if k <= c:
                continue
            lhs = tail_functional(ambiguity, BasePoint(index=w), p, k)
            factor = 2.0 ** (p - 1.0) * (1.0 + (c / (k - c)) ** p)
            rhs = factor * tail_functional(ambiguity, omega0, p, k - c)
            if lhs > rhs + 1e-9 * (1.0 + rhs):
                log.warning("base_point_bound_failed", base_point=w, level=k, lhs=lhs, rhs=rhs)
                return False
    return True


def convexity_counterexample(distance: float = 1.0, convexify_both: bool = False) -> CounterexampleReport:
    """Two Diracs as a raw set against their hull: W_1 is ``distance / 2`` while the dual value is 0.

    Convexifying the first set too makes both values 0.
    """
    if not np.isfinite(distance) or distance <= 0:
        raise NonpositiveScale(f"distance must be positive, got {distance!r}")
    space = FiniteMetricSpace(points=["0", "1"], dist=[[0.0, distance], [distance, 0.0]])
    diracs = [DiscreteMeasure.dirac(space, 0), DiscreteMeasure.dirac(space, 1)]
    first = AmbiguitySet(space=space, generators=diracs, convexify=convexify_both)
    hull = first.with_convexify(True)

    w1 = generalized_wasserstein(first, hull, 1.0).value
    dual = dual_distance(first, hull).value
    expected = 0.0 if convexify_both else distance / 2.0
    if abs(w1 - expected) > COUNTEREXAMPLE_TOLERANCE * max(1.0, distance) or abs(dual) > COUNTEREXAMPLE_TOLERANCE:
        raise NumericalBreakdown(f"counterexample values drifted: w1={w1!r} dual={dual!r}, expected ({expected!r}, 0)")
    log.info("counterexample_reproduced", w1=w1, dual=dual, convexify_both=convexify_both)
    return CounterexampleReport(w1=w1, dual=dual, distance=distance, convexify_both=convexify_both)
