"""Dense two-phase primal simplex with certified primal and dual solutions.

Pivoting follows Dantzig's rule and falls back to Bland's rule once a run of
degenerate pivots suggests cycling or a pivot element gets too small. After
the last pivot the basis is factorized again from the original data and both
primal and dual solutions are recomputed from it; the returned certificates
come from those recomputed vectors, not from the tableau.
"""

import math
from dataclasses import dataclass

import numpy as np
import structlog

from ambiset.errors import InvalidThreshold, NumericalBreakdown
from ambiset.models.arrays import FloatVector
from ambiset.models.lp import DEFAULT_TOLERANCE, LinearProgram, LpSolution, LpStatus, Relation, Sense

log = structlog.get_logger(__name__)

# Entries this small never serve as pivots.
PIVOT_TOLERANCE = 1e-11
# Smallest pivot accepted without switching to (or failing under) Bland's rule.
STABLE_PIVOT = 1e-9
# Consecutive degenerate pivots tolerated before switching to Bland's rule.
STALL_LIMIT = 50


@dataclass
class _StandardForm:
    """``min c.z  s.t.  A z = b, z >= 0, b >= 0`` plus the map back to x."""

    matrix: FloatVector
    rhs: FloatVector
    cost: FloatVector
    row_sign: FloatVector
    shift: FloatVector
    recover: FloatVector
    num_structural: int
    num_original_rows: int


def _standard_form(lp: LinearProgram) -> _StandardForm:
    n = lp.num_variables
    columns: list[tuple[int, float]] = []  # (original variable, coefficient)
    shift = np.zeros(n)
    upper_rows: list[tuple[int, float]] = []  # (structural column, bound)

    for j, bound in enumerate(lp.variable_bounds()):
        if math.isfinite(bound.lower):
            shift[j] = bound.lower
            columns.append((j, 1.0))
            if math.isfinite(bound.upper):
                upper_rows.append((len(columns) - 1, bound.upper - bound.lower))
        elif math.isfinite(bound.upper):
            shift[j] = bound.upper
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))

    num_structural = len(columns)
    recover = np.zeros((n, num_structural))
    for k, (j, coefficient) in enumerate(columns):
        recover[j, k] = coefficient

    rows: list[FloatVector] = []
    rhs: list[float] = []
    relations: list[Relation] = []
    for constraint in lp.constraints:
        rows.append(constraint.coefficients @ recover)
        rhs.append(constraint.rhs - float(constraint.coefficients @ shift))
        relations.append(constraint.relation)
    for k, width in upper_rows:
        row = np.zeros(num_structural)
        row[k] = 1.0
        rows.append(row)
        rhs.append(width)
        relations.append(Relation.LE)

    num_rows = len(rows)
    num_slack = sum(relation is not Relation.EQ for relation in relations)
    matrix = np.zeros((num_rows, num_structural + num_slack))
    slack = num_structural
    for i, (row, relation) in enumerate(zip(rows, relations, strict=True)):
        matrix[i, :num_structural] = row
        if relation is Relation.LE:
            matrix[i, slack] = 1.0
            slack += 1
        elif relation is Relation.GE:
            matrix[i, slack] = -1.0
            slack += 1

    b = np.array(rhs, dtype=np.float64)
    row_sign = np.where(b < 0.0, -1.0, 1.0)
    matrix *= row_sign[:, None]
    b *= row_sign

    objective = lp.objective if lp.sense is Sense.MIN else -lp.objective
    cost = np.zeros(matrix.shape[1])
    cost[:num_structural] = objective @ recover
    return _StandardForm(
        matrix=matrix,
        rhs=b,
        cost=cost,
        row_sign=row_sign,
        shift=shift,
        recover=recover,
        num_structural=num_structural,
        num_original_rows=len(lp.constraints),
    )


class _Tableau:
    """Simplex tableau with the reduced-cost row last and ``-z`` in the corner."""

    def __init__(self, matrix: FloatVector, rhs: FloatVector):
        m, n = matrix.shape
        self.m = m
        self.n = n
        self.table = np.zeros((m + 1, n + m + 1))
        self.table[:m, :n] = matrix
        self.table[:m, n : n + m] = np.eye(m)
        self.table[:m, -1] = rhs
        self.basis = list(range(n, n + m))
        self.iterations = 0

    def pivot(self, row: int, col: int) -> None:
        table = self.table
        table[row] /= table[row, col]
        factors = table[:, col].copy()
        factors[row] = 0.0
        table -= np.outer(factors, table[row])
        table[:, col] = 0.0
        table[row, col] = 1.0
        self.basis[row] = col
        self.iterations += 1

    def set_objective(self, cost: FloatVector) -> None:
        """Load reduced costs for ``cost`` (indexed over all columns) given the basis."""
        table = self.table
        table[-1] = 0.0
        table[-1, : cost.shape[0]] = cost
        for row, col in enumerate(self.basis):
            if table[-1, col] != 0.0:
                table[-1] -= table[-1, col] * table[row]

    def run(self, allowed: int, tol: float, max_iterations: int) -> LpStatus:
        """Pivot to optimality over the first ``allowed`` columns."""
        table = self.table
        bland = False
        stalled = 0
        scale = 1.0 + float(np.abs(table[-1, :allowed]).max(initial=0.0))
        while True:
            if self.iterations >= max_iterations:
                raise NumericalBreakdown(f"simplex exceeded {max_iterations} pivots")
            reduced = table[-1, :allowed]
            candidates = np.flatnonzero(reduced < -tol * scale)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            col = int(candidates[0]) if bland else int(candidates[np.argmin(reduced[candidates])])

            column = table[: self.m, col]
            eligible = np.flatnonzero(column > PIVOT_TOLERANCE)
            if eligible.size == 0:
                return LpStatus.UNBOUNDED
            ratios = table[eligible, -1] / column[eligible]
            best = float(ratios.min())
            tied = eligible[ratios <= best + 1e-12 * (1.0 + abs(best))]
            if bland:
                row = int(min(tied, key=lambda r: self.basis[r]))
                if column[row] < STABLE_PIVOT:
                    row = int(tied[np.argmax(column[tied])])
                    if column[row] < STABLE_PIVOT:
                        raise NumericalBreakdown(f"pivot {column[row]:.3e} below stability threshold")
            else:
                row = int(tied[np.argmax(column[tied])])
                if column[row] < STABLE_PIVOT:
                    log.debug("simplex_switch_to_bland", reason="small_pivot", pivot=float(column[row]))
                    bland = True
                    continue

            stalled = stalled + 1 if best <= 1e-15 else 0
            if not bland and stalled >= STALL_LIMIT:
                log.debug("simplex_switch_to_bland", reason="degenerate_stall", iterations=self.iterations)
                bland = True
            self.pivot(row, col)

    def drive_out_artificials(self) -> None:
        """Pivot zero-level artificial variables out of the basis where possible."""
        for row in range(self.m):
            if self.basis[row] < self.n:
                continue
            entries = np.abs(self.table[row, : self.n])
            col = int(np.argmax(entries)) if self.n else 0
            if self.n and entries[col] > STABLE_PIVOT:
                self.pivot(row, col)


def solve_lp(lp: LinearProgram, tol: float = DEFAULT_TOLERANCE) -> LpSolution:
    """Solve ``lp`` and return a certified solution.

    Infeasible and unbounded problems are reported through ``status``; only a
    loss of numerical control raises (``NumericalBreakdown``).
    """
    if tol <= 0:
        raise InvalidThreshold(f"tolerance must be positive, got {tol!r}")
    solution = _solve(lp, tol)
    log.debug(
        "lp_solved",
        status=solution.status.value,
        iterations=solution.iterations,
        gap=solution.duality_gap,
        rows=len(lp.constraints),
        variables=lp.objective.shape[0],
    )
    return solution


def _solve(lp: LinearProgram, tol: float) -> LpSolution:
    form = _standard_form(lp)
    m, n = form.matrix.shape
    max_iterations = 50 * (m + n) + 1000

    if m == 0:
        if np.any(form.cost < -tol):
            return LpSolution(status=LpStatus.UNBOUNDED)
        z = np.zeros(n)
        y = np.zeros(0)
        return _certify(lp, form, z, y, iterations=0, tol=tol)

    tableau = _Tableau(form.matrix, form.rhs)
    phase_one_cost = np.concatenate([np.zeros(n), np.ones(m)])
    tableau.set_objective(phase_one_cost)
    tableau.run(allowed=n, tol=tol, max_iterations=max_iterations)
    infeasibility = -float(tableau.table[-1, -1])
    if infeasibility > 10 * tol * (1.0 + float(form.rhs.max(initial=0.0))):
        log.debug("lp_infeasible", infeasibility=infeasibility)
        return LpSolution(status=LpStatus.INFEASIBLE, iterations=tableau.iterations)

    tableau.drive_out_artificials()
    tableau.set_objective(np.concatenate([form.cost, np.zeros(m)]))
    status = tableau.run(allowed=n, tol=tol, max_iterations=max_iterations)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status=status, iterations=tableau.iterations)

    full = np.hstack([form.matrix, np.eye(m)])
    basis = np.array(tableau.basis)
    try:
        basic_matrix = full[:, basis]
        x_basic = np.linalg.solve(basic_matrix, form.rhs)
        y = np.linalg.solve(basic_matrix.T, np.concatenate([form.cost, np.zeros(m)])[basis])
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown("final simplex basis is singular") from exc

    z_full = np.zeros(n + m)
    z_full[basis] = x_basic
    feasibility_tol = 10 * tol * (1.0 + float(np.abs(form.rhs).max(initial=0.0)))
    if z_full.min() < -feasibility_tol or z_full[n:].max(initial=0.0) > feasibility_tol:
        raise NumericalBreakdown("recomputed basic solution is infeasible")
    z = np.clip(z_full[:n], 0.0, None)
    return _certify(lp, form, z, y, iterations=tableau.iterations, tol=tol)


def _certify(
    lp: LinearProgram, form: _StandardForm, z: FloatVector, y: FloatVector, iterations: int, tol: float
) -> LpSolution:
    reduced = form.cost - form.matrix.T @ y if y.size else form.cost.copy()
    primal_value = float(form.cost @ z)
    dual_value = float(form.rhs @ y) if y.size else 0.0
    gap = abs(primal_value - dual_value)
    dual_infeasibility = max(0.0, -float(reduced.min(initial=0.0)))
    slackness = abs(float(z @ reduced))
    scale = 1.0 + max(abs(primal_value), abs(dual_value))
    cost_scale = 1.0 + float(np.abs(form.cost).max(initial=0.0))
    if gap > 10 * tol * scale or dual_infeasibility > 10 * tol * cost_scale or slackness > 10 * tol * scale:
        raise NumericalBreakdown(
            f"LP certificate failed: gap={gap:.3e} dual_infeasibility={dual_infeasibility:.3e} slackness={slackness:.3e}"
        )

    x = form.shift + form.recover @ z[: form.num_structural]
    sign = 1.0 if lp.sense is Sense.MIN else -1.0
    shadow = sign * form.row_sign[: form.num_original_rows] * y[: form.num_original_rows]
    return LpSolution(
        status=LpStatus.OPTIMAL,
        value=float(lp.objective @ x),
        primal=x,
        dual=shadow,
        duality_gap=gap,
        slackness_residual=slackness,
        iterations=iterations,
    )
