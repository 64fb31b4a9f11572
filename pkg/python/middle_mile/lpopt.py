"""
Load-aware optimal topology

Every ordered node pair (i, j) gets a link utility beta_ij in [0, 1], the
fraction of the full RB pool used on link i -> j. The LP

    minimize    sum_ij beta_ij
    subject to  sum_j beta_ji C_ji - sum_j beta_ij C_ij >= lambda_i   for every AP i
                sum_j beta_ij <= 1                                  for every node i (transmit)
                sum_i beta_ij <= 1                                  for every node j (receive)

picks the links and their share of the band at once: the RBs on a link
are beta_ij * n_rbs. Inflow into an AP is the sum of beta_ji C_ji, so the
capacity always belongs to the link carrying the flow.

Capacities enter the model in Mbps (demands too) to keep the tableau
well scaled; the constraints are the bits/s ones divided by 1e6.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from loguru import logger

from .errors import InvalidArgumentError, SolverInternalError
from .lp_solver import LpModel, LpStatus, Relation, solve
from .multihop import ALPHA_PRECISION
from .radio import RadioConfig, link_metrics, link_table
from .scenario import POP_ID, Scenario
from .topology import EvalResult, Reason, Topology, TopologyEdge, TopologyKind

BETA_EDGE_THRESHOLD = 1e-6
BETA_RANGE_TOL = 1e-6
# beta * n_rbs values like 20.000000000000004 must still round up to 20
CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class UtilityMatrix:
    """beta[i, j] for every ordered pair; the diagonal is zero"""

    beta: np.ndarray
    objective: float

    @property
    def n_nodes(self) -> int:
        return self.beta.shape[0]

    def row_sums(self) -> np.ndarray:
        return self.beta.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.beta.sum(axis=0)


def variable_index(n_nodes: int) -> Dict[Tuple[int, int], int]:
    """Column of beta_ij in the model, row-major over ordered pairs i != j"""
    index = {}
    for i in range(n_nodes):
        for j in range(n_nodes):
            if i != j:
                index[(i, j)] = len(index)
    return index


def capacity_matrix_mbps(scenario: Scenario, cfg: RadioConfig) -> np.ndarray:
    n = len(scenario.nodes)
    capacity = np.zeros((n, n))
    for (i, j), metrics in link_table(scenario, cfg).items():
        capacity[i, j] = metrics.capacity_bps / 1e6
    return capacity


def build_flow_model(capacity_mbps: np.ndarray, demand_mbps: np.ndarray) -> LpModel:
    """
    LP over explicit capacities and demands.

    Args:
        capacity_mbps: (N+1) x (N+1) full-band link capacities, row = transmitter
        demand_mbps: length N+1, entry 0 (the PoP) must be 0
    """
    n = capacity_mbps.shape[0]
    if capacity_mbps.shape != (n, n) or demand_mbps.shape != (n,):
        raise InvalidArgumentError(
            f"capacity {capacity_mbps.shape} and demand {demand_mbps.shape} do not describe the same nodes"
        )
    if demand_mbps[POP_ID] != 0:
        raise InvalidArgumentError(f"PoP demand must be 0, got {demand_mbps[POP_ID]}")

    index = variable_index(n)
    names = [f"b_{i}_{j}" for (i, j) in index]
    model = LpModel(
        n_vars=len(index),
        objective=np.ones(len(index)),
        bounds=[(0.0, 1.0)] * len(index),
        var_names=names,
    )

    for i in range(n):
        if i == POP_ID:
            continue
        row = np.zeros(len(index))
        for j in range(n):
            if j == i:
                continue
            row[index[(j, i)]] += capacity_mbps[j, i]
            row[index[(i, j)]] -= capacity_mbps[i, j]
        model.add_constraint(row, Relation.GE, float(demand_mbps[i]), name=f"flow_{i}")

    for i in range(n):
        row = np.zeros(len(index))
        for j in range(n):
            if j != i:
                row[index[(i, j)]] = 1.0
        model.add_constraint(row, Relation.LE, 1.0, name=f"tx_{i}")

    for j in range(n):
        row = np.zeros(len(index))
        for i in range(n):
            if i != j:
                row[index[(i, j)]] = 1.0
        model.add_constraint(row, Relation.LE, 1.0, name=f"rx_{j}")

    return model


def build_lp_model(scenario: Scenario, cfg: RadioConfig) -> LpModel:
    demand = np.array([node.demand_mbps for node in scenario.nodes], dtype=float)
    return build_flow_model(capacity_matrix_mbps(scenario, cfg), demand)


def solve_flow_model(model: LpModel, n_nodes: int) -> Optional[UtilityMatrix]:
    """None when the LP is infeasible"""
    solution = solve(model)
    if solution.status is LpStatus.INFEASIBLE:
        return None
    if solution.status is LpStatus.UNBOUNDED:
        raise SolverInternalError("utility LP reported unbounded although its objective is bounded below by 0")

    beta = np.zeros((n_nodes, n_nodes))
    for (i, j), col in variable_index(n_nodes).items():
        beta[i, j] = solution.x[col]

    violation = model.max_violation(solution.x)
    if violation > 1e-6:
        logger.warning(f"LP solution violates its constraints by {violation:.3e}")
    return UtilityMatrix(beta=beta, objective=float(solution.objective_value))


def solve_topology(scenario: Scenario, cfg: RadioConfig) -> Optional[UtilityMatrix]:
    """Build and solve the utility LP; None marks an infeasible scenario."""
    return solve_flow_model(build_lp_model(scenario, cfg), len(scenario.nodes))


def extract_topology(utility: UtilityMatrix, cfg: RadioConfig, scenario: Scenario) -> Topology:
    """
    Links with beta_ij > 1e-6, each allocated beta_ij * n_rbs RBs (real)
    and ceil of that for integer reporting.
    """
    beta = utility.beta
    if np.any(beta < -BETA_RANGE_TOL) or np.any(beta > 1.0 + BETA_RANGE_TOL):
        raise InvalidArgumentError(f"utility entries must lie in [0, 1], found range [{beta.min()}, {beta.max()}]")

    edges = []
    n = utility.n_nodes
    for i in range(n):
        for j in range(n):
            b = float(beta[i, j])
            if i == j or b <= BETA_EDGE_THRESHOLD:
                continue
            metrics = link_metrics(scenario.nodes[i], scenario.nodes[j], cfg)
            rbs = b * cfg.n_rbs
            edges.append(
                TopologyEdge(
                    src=i,
                    dst=j,
                    metrics=metrics,
                    rbs=rbs,
                    rb_count=math.ceil(rbs - CEIL_SLACK),
                    load_bps=b * metrics.capacity_bps,
                    beta=b,
                )
            )
    return Topology(kind=TopologyKind.LP, n_nodes=n, edges=tuple(edges))


def _solve_scaled(capacity: np.ndarray, demand: np.ndarray, alpha: float) -> Optional[UtilityMatrix]:
    return solve_flow_model(build_flow_model(capacity, alpha * demand), capacity.shape[0])


def evaluate_lp(scenario: Scenario, cfg: RadioConfig, partial_service: bool = False) -> EvalResult:
    """
    Solve the utility LP for one scenario.

    Infeasible scenarios are marked excluded (dropped from served-load
    means) unless partial_service is set, in which case demands are
    scaled by the largest feasible alpha, found by bisection.
    """
    capacity = capacity_matrix_mbps(scenario, cfg)
    demand = np.array([node.demand_mbps for node in scenario.nodes], dtype=float)
    total_demand = scenario.total_demand_mbps

    utility = _solve_scaled(capacity, demand, 1.0)
    if utility is not None:
        return EvalResult(
            scenario_seed=scenario.seed,
            topology_kind=TopologyKind.LP,
            feasible=True,
            served_mbps=total_demand,
            served_per_ap_mbps={ap.id: ap.demand_mbps for ap in scenario.aps},
            total_demand_mbps=total_demand,
            alpha=1.0,
            topology=extract_topology(utility, cfg, scenario),
            utility=utility,
        )

    if not partial_service:
        logger.debug(f"LP infeasible for scenario seed={scenario.seed}, excluded")
        return EvalResult(
            scenario_seed=scenario.seed,
            topology_kind=TopologyKind.LP,
            feasible=False,
            served_mbps=0.0,
            served_per_ap_mbps={ap.id: 0.0 for ap in scenario.aps},
            total_demand_mbps=total_demand,
            alpha=None,
            reason=Reason.LP_INFEASIBLE,
            excluded=True,
        )

    lo, hi = 0.0, 1.0
    best: Optional[UtilityMatrix] = None
    while hi - lo > ALPHA_PRECISION:
        mid = (lo + hi) / 2.0
        attempt = _solve_scaled(capacity, demand, mid)
        if attempt is not None:
            lo, best = mid, attempt
        else:
            hi = mid

    return EvalResult(
        scenario_seed=scenario.seed,
        topology_kind=TopologyKind.LP,
        feasible=False,
        served_mbps=lo * total_demand,
        served_per_ap_mbps={ap.id: lo * ap.demand_mbps for ap in scenario.aps},
        total_demand_mbps=total_demand,
        alpha=lo,
        reason=Reason.LP_INFEASIBLE,
        topology=extract_topology(best, cfg, scenario) if best is not None else None,
        utility=best,
    )


def dump_utility(utility: UtilityMatrix) -> str:
    """beta as a labeled matrix, rows = transmitter"""
    n = utility.n_nodes
    header = "      " + "".join(f"{j:>9d}" for j in range(n))
    lines = [f"link utility (objective {utility.objective:.6g})", header]
    for i in range(n):
        lines.append(f"{i:>5d} " + "".join(f"{utility.beta[i, j]:9.4f}" for j in range(n)))
    return "\n".join(lines) + "\n"
