"""
Dense two-phase simplex

Solves  min c.x  subject to rows a.x (<=, >=, =) b  and  lower <= x <= upper.

The model is brought to standard form (x shifted to its lower bound,
finite upper bounds as explicit rows, negative right-hand sides
flipped, then slack / surplus / artificial columns). Phase 1 minimizes
the artificial sum; phase 2 the real objective. Pivoting follows Bland's
rule in both phases, so a given model always takes the same path.

Sizes in this project stay around a hundred columns and a few dozen
rows, where a dense numpy tableau is simple and fast enough.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .errors import InvalidModelError, SolverInternalError

PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
MAX_ITERATIONS = 100_000


class Relation(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpConstraint:
    coefficients: np.ndarray
    relation: Relation
    rhs: float
    name: str = ""


@dataclass
class LpModel:
    """
    Dense LP. bounds holds one (lower, upper) pair per variable; lower
    must be finite, upper may be math.inf.
    """

    n_vars: int
    objective: np.ndarray
    constraints: List[LpConstraint] = field(default_factory=list)
    bounds: List[Tuple[float, float]] = field(default_factory=list)
    var_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if not self.bounds:
            self.bounds = [(0.0, math.inf)] * self.n_vars
        if not self.var_names:
            self.var_names = [f"x{j}" for j in range(self.n_vars)]

    def add_constraint(self, coefficients: Sequence[float], relation: Relation, rhs: float, name: str = ""):
        self.constraints.append(
            LpConstraint(np.asarray(coefficients, dtype=float), Relation(relation), float(rhs), name)
        )

    def validate(self):
        if self.n_vars < 1:
            raise InvalidModelError(f"model needs at least one variable, got {self.n_vars}")
        if self.objective.shape != (self.n_vars,):
            raise InvalidModelError(f"objective has shape {self.objective.shape}, expected ({self.n_vars},)")
        if not np.all(np.isfinite(self.objective)):
            raise InvalidModelError("objective has non-finite entries")
        if len(self.bounds) != self.n_vars:
            raise InvalidModelError(f"{len(self.bounds)} bounds for {self.n_vars} variables")
        if len(self.var_names) != self.n_vars:
            raise InvalidModelError(f"{len(self.var_names)} names for {self.n_vars} variables")
        for j, (lower, upper) in enumerate(self.bounds):
            if not math.isfinite(lower) or math.isnan(upper) or upper == -math.inf:
                raise InvalidModelError(f"variable {self.var_names[j]} has bounds [{lower}, {upper}]")
            if lower > upper:
                raise InvalidModelError(f"variable {self.var_names[j]} has lower {lower} > upper {upper}")
        for k, row in enumerate(self.constraints):
            if row.coefficients.shape != (self.n_vars,):
                raise InvalidModelError(
                    f"constraint {row.name or k} has {row.coefficients.shape} coefficients, expected ({self.n_vars},)"
                )
            if not np.all(np.isfinite(row.coefficients)) or not math.isfinite(row.rhs):
                raise InvalidModelError(f"constraint {row.name or k} has non-finite entries")

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of x, each scaled by 1 + |rhs|"""
        worst = 0.0
        for row in self.constraints:
            lhs = float(row.coefficients @ x)
            if row.relation is Relation.LE:
                gap = lhs - row.rhs
            elif row.relation is Relation.GE:
                gap = row.rhs - lhs
            else:
                gap = abs(lhs - row.rhs)
            worst = max(worst, gap / (1.0 + abs(row.rhs)))
        for j, (lower, upper) in enumerate(self.bounds):
            worst = max(worst, lower - x[j], x[j] - upper)
        return worst


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray]
    objective_value: Optional[float]
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Simplex tableau with the reduced-cost row last; T[-1, -1] holds -z."""

    def __init__(self, table: np.ndarray, basis: List[int]):
        self.T = table
        self.basis = basis
        self.iterations = 0

    def pivot(self, row: int, col: int):
        T = self.T
        T[row, :] /= T[row, col]
        column = T[:, col].copy()
        column[row] = 0.0
        T -= np.outer(column, T[row, :])
        self.basis[row] = col
        self.iterations += 1

    def run(self, allowed_columns: int) -> LpStatus:
        """Bland's rule until optimal or unbounded"""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.iterations > MAX_ITERATIONS:
                raise SolverInternalError(f"simplex did not converge in {MAX_ITERATIONS} pivots")

            reduced = T[-1, :allowed_columns]
            entering = np.flatnonzero(reduced < -PIVOT_TOL)
            if entering.size == 0:
                return LpStatus.OPTIMAL
            col = int(entering[0])

            best_row = -1
            best_ratio = math.inf
            for i in range(m):
                a = T[i, col]
                if a > PIVOT_TOL:
                    ratio = T[i, -1] / a
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12 and self.basis[i] < self.basis[best_row]
                    ):
                        best_row, best_ratio = i, ratio
            if best_row < 0:
                return LpStatus.UNBOUNDED
            self.pivot(best_row, col)


def solve(model: LpModel) -> LpSolution:
    """Two-phase primal simplex. Raises InvalidModelError on a malformed model."""
    model.validate()
    n = model.n_vars
    lower = np.array([lo for lo, _ in model.bounds], dtype=float)

    # Rows over the shifted variables x' = x - lower
    rows: List[Tuple[np.ndarray, Relation, float]] = []
    for row in model.constraints:
        rows.append((row.coefficients.copy(), row.relation, row.rhs - float(row.coefficients @ lower)))
    for j, (lo, up) in enumerate(model.bounds):
        if math.isfinite(up):
            unit = np.zeros(n)
            unit[j] = 1.0
            rows.append((unit, Relation.LE, up - lo))

    normalized = []
    for coeffs, relation, rhs in rows:
        if rhs < 0:
            coeffs, rhs = -coeffs, -rhs
            relation = {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(relation, relation)
        normalized.append((coeffs, relation, rhs))

    m = len(normalized)
    n_slack = sum(1 for _, rel, _ in normalized if rel is not Relation.EQ)
    n_art = sum(1 for _, rel, _ in normalized if rel is not Relation.LE)
    art_start = n + n_slack
    width = art_start + n_art

    T = np.zeros((m + 1, width + 1))
    basis: List[int] = []
    slack_col, art_col = n, art_start
    for i, (coeffs, relation, rhs) in enumerate(normalized):
        T[i, :n] = coeffs
        T[i, -1] = rhs
        if relation is Relation.LE:
            T[i, slack_col] = 1.0
            basis.append(slack_col)
            slack_col += 1
        else:
            if relation is Relation.GE:
                T[i, slack_col] = -1.0
                slack_col += 1
            T[i, art_col] = 1.0
            basis.append(art_col)
            art_col += 1

    # Phase 1: minimize the sum of artificials
    T[-1, art_start:width] = 1.0
    for i, b in enumerate(basis):
        if b >= art_start:
            T[-1, :] -= T[i, :]

    tableau = _Tableau(T, basis)
    status = tableau.run(width)
    if status is not LpStatus.OPTIMAL:
        raise SolverInternalError(f"phase 1 returned {status.value}")

    infeasibility = -tableau.T[-1, -1]
    if infeasibility > FEASIBILITY_TOL:
        logger.debug(f"LP infeasible: phase 1 objective {infeasibility:.3e}")
        return LpSolution(status=LpStatus.INFEASIBLE, x=None, objective_value=None, iterations=tableau.iterations)

    _drive_out_artificials(tableau, art_start)
    T = np.delete(tableau.T, np.s_[art_start:width], axis=1)
    tableau.T = T

    # Phase 2: real objective over the remaining columns
    cost = np.zeros(art_start)
    cost[:n] = model.objective
    T[-1, :] = 0.0
    T[-1, :art_start] = cost
    for i, b in enumerate(tableau.basis):
        if cost[b] != 0.0:
            T[-1, :] -= cost[b] * T[i, :]

    status = tableau.run(art_start)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status=LpStatus.UNBOUNDED, x=None, objective_value=None, iterations=tableau.iterations)

    shifted = np.zeros(art_start)
    for i, b in enumerate(tableau.basis):
        shifted[b] = tableau.T[i, -1]
    x = lower + shifted[:n]

    # Snap rounding noise back inside the bounds
    for j, (lo, up) in enumerate(model.bounds):
        if x[j] < lo and lo - x[j] <= PIVOT_TOL:
            x[j] = lo
        elif x[j] > up and x[j] - up <= PIVOT_TOL:
            x[j] = up

    value = float(model.objective @ x)
    logger.debug(f"LP optimal after {tableau.iterations} pivots, objective {value:.6g}")
    return LpSolution(status=LpStatus.OPTIMAL, x=x, objective_value=value, iterations=tableau.iterations)


def _drive_out_artificials(tableau: _Tableau, art_start: int):
    """Pivot zero-level artificials out of the basis; drop rows that are redundant."""
    redundant = []
    for i, b in enumerate(tableau.basis):
        if b < art_start:
            continue
        candidates = np.flatnonzero(np.abs(tableau.T[i, :art_start]) > PIVOT_TOL)
        if candidates.size:
            tableau.pivot(i, int(candidates[0]))
        else:
            redundant.append(i)
    if redundant:
        tableau.T = np.delete(tableau.T, redundant, axis=0)
        tableau.basis = [b for i, b in enumerate(tableau.basis) if i not in redundant]


def dump_model(model: LpModel) -> str:
    """Human-readable listing for triage"""

    def terms(coefficients: np.ndarray) -> str:
        parts = [
            f"{coef:+.6g} {model.var_names[j]}" for j, coef in enumerate(coefficients) if coef != 0.0
        ]
        return " ".join(parts) if parts else "0"

    lines = [f"minimize  {terms(model.objective)}", "subject to"]
    for k, row in enumerate(model.constraints):
        label = row.name or f"c{k}"
        lines.append(f"  {label}: {terms(row.coefficients)} {row.relation.value} {row.rhs:.6g}")
    lines.append("bounds")
    for name, (lo, up) in zip(model.var_names, model.bounds):
        lines.append(f"  {lo:.6g} <= {name} <= {up:.6g}")
    return "\n".join(lines) + "\n"
