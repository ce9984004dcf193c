"""Transportation simplex on the bipartite flow formulation.

Bases are spanning trees of the complete bipartite graph between sources
(rows) and targets (columns). Marginals are perturbed by ``a_i + eps`` and
``b_last + n * eps`` so that every basis met on the way is nondegenerate;
flows are recomputed from the tree at every step, so rounding never
accumulates. The final basis is solved once more with the true marginals.
"""

from collections import deque

import numpy as np
import structlog

from ambiset.errors import DimensionMismatch, MarginalMismatch, NumericalBreakdown
from ambiset.models.arrays import FloatVector
from ambiset.models.lp import TransportSolution

log = structlog.get_logger(__name__)

MARGINAL_TOLERANCE = 1e-12
# Plan entries below this are rounding noise.
PLAN_CLEANUP = 1e-12
PERTURBATION = 1e-11
PROJECTION_SWEEPS = 3

Cell = tuple[int, int]


def _check_marginals(cost: FloatVector, row: FloatVector, col: FloatVector) -> None:
    if cost.ndim != 2 or cost.shape != (row.shape[0], col.shape[0]):
        raise DimensionMismatch(f"cost shape {cost.shape} does not match marginals ({row.shape[0]}, {col.shape[0]})")
    if cost.size == 0:
        raise DimensionMismatch("transport problem needs at least one source and one target")
    if not np.all(np.isfinite(cost)):
        raise DimensionMismatch("transport costs must be finite")
    for name, marginal in (("row", row), ("column", col)):
        if np.any(marginal < 0) or not np.all(np.isfinite(marginal)):
            raise MarginalMismatch(f"{name} marginal has negative or non-finite entries")
        total = float(marginal.sum())
        if abs(total - 1.0) > MARGINAL_TOLERANCE:
            raise MarginalMismatch(f"{name} marginal sums to {total!r}, expected 1")


def _northwest_corner(row: FloatVector, col: FloatVector) -> list[Cell]:
    n, m = row.shape[0], col.shape[0]
    left_row = row.copy()
    left_col = col.copy()
    cells: list[Cell] = []
    i = j = 0
    while True:
        cells.append((i, j))
        if i == n - 1 and j == m - 1:
            return cells
        moved = min(left_row[i], left_col[j])
        left_row[i] -= moved
        left_col[j] -= moved
        if i == n - 1:
            j += 1
        elif j == m - 1 or left_row[i] <= left_col[j]:
            i += 1
        else:
            j += 1


class _BasisTree:
    """Spanning tree over ``n`` row nodes and ``m`` column nodes (offset by ``n``)."""

    def __init__(self, n: int, m: int, cells: list[Cell]):
        self.n = n
        self.m = m
        self.cells = list(cells)

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per node: (neighbour node, cell position) pairs."""
        graph: list[list[tuple[int, int]]] = [[] for _ in range(self.n + self.m)]
        for position, (i, j) in enumerate(self.cells):
            graph[i].append((self.n + j, position))
            graph[self.n + j].append((i, position))
        return graph

    def flows(self, row: FloatVector, col: FloatVector) -> FloatVector:
        """Basic flows meeting ``row``/``col`` (leaf elimination)."""
        graph = self.adjacency()
        remaining = np.concatenate([row, col]).astype(np.float64)
        degree = [len(edges) for edges in graph]
        alive = [True] * len(self.cells)
        values = np.zeros(len(self.cells))
        leaves = deque(node for node, d in enumerate(degree) if d == 1)
        while leaves:
            node = leaves.popleft()
            if degree[node] != 1:
                continue
            neighbour, position = next((other, pos) for other, pos in graph[node] if alive[pos])
            values[position] = remaining[node]
            remaining[neighbour] -= remaining[node]
            remaining[node] = 0.0
            alive[position] = False
            degree[node] -= 1
            degree[neighbour] -= 1
            if degree[neighbour] == 1:
                leaves.append(neighbour)
        return values

    def potentials(self, cost: FloatVector) -> tuple[FloatVector, FloatVector]:
        """Potentials with ``f_0 = 0`` and ``f_i + g_j = cost_ij`` on the tree."""
        graph = self.adjacency()
        value = np.zeros(self.n + self.m)
        seen = [False] * (self.n + self.m)
        seen[0] = True
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for other, position in graph[node]:
                if seen[other]:
                    continue
                i, j = self.cells[position]
                value[other] = cost[i, j] - value[node]
                seen[other] = True
                queue.append(other)
        if not all(seen):
            raise NumericalBreakdown("transport basis is not a spanning tree")
        return value[: self.n], value[self.n :]

    def path(self, start: int, goal: int) -> list[int]:
        """Cell positions on the tree path from ``start`` to ``goal``, in order."""
        graph = self.adjacency()
        parent: dict[int, tuple[int, int]] = {start: (-1, -1)}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                break
            for other, position in graph[node]:
                if other not in parent:
                    parent[other] = (node, position)
                    queue.append(other)
        steps: list[int] = []
        node = goal
        while node != start:
            previous, position = parent[node]
            steps.append(position)
            node = previous
        steps.reverse()
        return steps


def _project_marginals(plan: FloatVector, row: FloatVector, col: FloatVector) -> FloatVector:
    """Rescale rows, then columns, of a cleaned plan back onto the marginals.

    Columns come out exact; rows stay within rounding of theirs. Rows or
    columns whose whole mass was cleaned away are left at zero.
    """
    for _ in range(PROJECTION_SWEEPS):
        sums = plan.sum(axis=1)
        plan *= np.divide(row, sums, out=np.ones_like(row), where=sums > 0)[:, None]
        sums = plan.sum(axis=0)
        plan *= np.divide(col, sums, out=np.ones_like(col), where=sums > 0)[None, :]
    return plan


def solve_transport(cost: FloatVector, row_marginal: FloatVector, col_marginal: FloatVector) -> TransportSolution:
    """Minimum-cost coupling of ``row_marginal`` and ``col_marginal`` under ``cost``."""
    cost = np.asarray(cost, dtype=np.float64)
    row = np.asarray(row_marginal, dtype=np.float64)
    col = np.asarray(col_marginal, dtype=np.float64)
    _check_marginals(cost, row, col)

    n, m = cost.shape
    perturbed_row = row + PERTURBATION
    perturbed_col = col.copy()
    perturbed_col[-1] += n * PERTURBATION

    tree = _BasisTree(n, m, _northwest_corner(perturbed_row, perturbed_col))
    entering_tol = 1e-12 * (1.0 + float(np.abs(cost).max()))
    max_iterations = 50 * n * m + 1000
    iterations = 0
    while True:
        f, g = tree.potentials(cost)
        reduced = cost - f[:, None] - g[None, :]
        flat = int(np.argmin(reduced))
        if reduced.flat[flat] >= -entering_tol:
            break
        if iterations >= max_iterations:
            raise NumericalBreakdown(f"transport simplex exceeded {max_iterations} pivots")
        entering = divmod(flat, m)

        flows = tree.flows(perturbed_row, perturbed_col)
        steps = tree.path(n + entering[1], entering[0])
        decreasing = steps[0::2]
        leaving = min(decreasing, key=lambda position: (flows[position], tree.cells[position]))
        if flows[leaving] < -PLAN_CLEANUP:
            raise NumericalBreakdown("transport basis lost feasibility")
        tree.cells[leaving] = entering
        iterations += 1

    flows = tree.flows(row, col)
    if flows.min(initial=0.0) < -(n + m) * PERTURBATION:
        raise NumericalBreakdown(f"final transport flow {float(flows.min())!r} is negative")
    plan = np.zeros((n, m))
    for (i, j), flow in zip(tree.cells, flows, strict=True):
        plan[i, j] = flow
    plan[plan < PLAN_CLEANUP] = 0.0
    plan = _project_marginals(plan, row, col)

    f, g = tree.potentials(cost)
    value = float((cost * plan).sum())
    log.debug("transport_solved", rows=n, cols=m, iterations=iterations, value=value)
    return TransportSolution(value=value, plan=plan, row_potential=f, col_potential=g, iterations=iterations)
