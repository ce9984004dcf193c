"""Classical Wasserstein distances and the Kantorovich-Rubinstein dual."""

from collections.abc import Sequence

import numpy as np
import structlog

from ambiset.core.ground_space import truncate
from ambiset.core.lp import solve_lp, solve_transport
from ambiset.core.measures import check_exponent, check_same_space
from ambiset.errors import NumericalBreakdown
from ambiset.models.arrays import FloatVector
from ambiset.models.lp import Bound, Constraint, LinearProgram, LpSolution, Relation, Sense
from ambiset.models.measures import DiscreteMeasure, TestFunction
from ambiset.models.reports import KantorovichPotential, TransportPlan

log = structlog.get_logger(__name__)


def lipschitz_constraints(dist: FloatVector, width: int) -> list[Constraint]:
    """Rows ``phi(u) - phi(v) <= d(u, v)`` over the first ``len(dist)`` of ``width`` variables."""
    size = dist.shape[0]
    rows: list[Constraint] = []
    for u in range(size):
        for v in range(size):
            if u == v:
                continue
            coefficients = np.zeros(width)
            coefficients[u] = 1.0
            coefficients[v] = -1.0
            rows.append(Constraint(coefficients=coefficients, relation=Relation.LE, rhs=float(dist[u, v])))
    return rows


def lipschitz_bounds(dist: FloatVector) -> list[Bound]:
    """Pin ``phi`` to 0 at the first point; Lipschitz rows then confine the rest."""
    radius = dist[0]
    return [Bound(lower=0.0, upper=0.0)] + [Bound(lower=-float(r), upper=float(r)) for r in radius[1:]]


def mcshane_extension(dist: FloatVector, support: Sequence[int], values: FloatVector) -> FloatVector:
    """Largest 1-Lipschitz function below ``values`` on ``support``, evaluated everywhere."""
    return np.min(values[:, None] + dist[list(support)], axis=0)


def require_optimal(solution: LpSolution, what: str) -> LpSolution:
    if not solution.is_optimal:
        raise NumericalBreakdown(f"{what} LP ended {solution.status}, expected optimal")
    return solution


def wasserstein(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 1.0) -> tuple[float, TransportPlan]:
    """``W_p(mu, nu)`` and an optimal coupling.

    The transport problem is solved on the supports only; the plan is embedded
    back into an n x n matrix.
    """
    check_same_space(mu.space, nu.space)
    p = check_exponent(p)
    rows, cols = mu.support(), nu.support()
    cost = mu.space.dist[np.ix_(rows, cols)] ** p
    solution = solve_transport(cost, mu.weights[rows], nu.weights[cols])

    plan = np.zeros((mu.space.size, mu.space.size))
    plan[np.ix_(rows, cols)] = solution.plan
    value = max(0.0, solution.value) ** (1.0 / p)
    log.debug("wasserstein_computed", p=p, value=value, iterations=solution.iterations)
    return value, TransportPlan(plan=plan, cost_exponent=p, value=value)


def truncated_wasserstein(
    mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 1.0, cap: float = 1.0
) -> tuple[float, TransportPlan]:
    """``W_p`` under the bounded metric ``min(d, cap)``."""
    check_same_space(mu.space, nu.space)
    bounded = truncate(mu.space, cap)
    return wasserstein(
        DiscreteMeasure(space=bounded, weights=mu.weights), DiscreteMeasure(space=bounded, weights=nu.weights), p
    )


def kr_dual(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[float, KantorovichPotential]:
    """``max E_mu[phi] - E_nu[phi]`` over 1-Lipschitz ``phi``, with a witness normalized to ``phi(0) = 0``."""
    check_same_space(mu.space, nu.space)
    space = mu.space
    support = sorted(set(mu.support()) | set(nu.support()))
    dist = space.dist[np.ix_(support, support)]
    program = LinearProgram(
        objective=(mu.weights - nu.weights)[support],
        sense=Sense.MAX,
        constraints=lipschitz_constraints(dist, len(support)),
        bounds=lipschitz_bounds(dist),
    )
    solution = require_optimal(solve_lp(program), "Kantorovich dual")

    values = mcshane_extension(space.dist, support, solution.primal)
    witness = KantorovichPotential(phi=TestFunction(space=space, values=values - values[0]))
    value = max(0.0, solution.value)
    log.debug("kr_dual_computed", value=value, iterations=solution.iterations)
    return value, witness
