"""
Point to Multipoint (PMP) topology

Every AP attaches straight to the eNB and all links share one cell's RB
pool. When the pool covers every requirement each AP gets exactly what
it needs; otherwise the pool is split in proportion to the requirements
with a largest-remainder rule (ties to the lower node id).
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from loguru import logger

from .radio import RadioConfig, link_metrics, rbs_required
from .scenario import POP_ID, Scenario
from .topology import EvalResult, Reason, Topology, TopologyEdge, TopologyKind, served_total


@dataclass(frozen=True)
class ApAllocation:
    node_id: int
    demand_mbps: float
    rate_bps: float
    required_rbs: Optional[int]  # None: the link carries nothing
    allocated_rbs: int
    served_mbps: float


@dataclass(frozen=True)
class PmpAllocation:
    per_ap: Tuple[ApAllocation, ...]
    total_required: int
    n_rbs: int
    feasible: bool

    @property
    def total_allocated(self) -> int:
        return sum(ap.allocated_rbs for ap in self.per_ap)

    @property
    def has_zero_rate_link(self) -> bool:
        return any(ap.required_rbs is None for ap in self.per_ap)

    def served_per_ap_mbps(self) -> Dict[int, float]:
        return {ap.node_id: ap.served_mbps for ap in self.per_ap}


def build_pmp(scenario: Scenario, cfg: RadioConfig) -> Topology:
    """Star: one edge from the PoP to every AP"""
    pop = scenario.pop
    edges = tuple(
        TopologyEdge(src=POP_ID, dst=ap.id, metrics=link_metrics(pop, ap, cfg)) for ap in scenario.aps
    )
    return Topology(kind=TopologyKind.PMP, n_nodes=len(scenario.nodes), edges=edges)


def largest_remainder(weights: Dict[int, int], pool: int) -> Dict[int, int]:
    """
    Split an integer pool in proportion to integer weights.

    Floors first, then one extra unit each by descending remainder, ties
    by ascending key. Exact integer arithmetic.

    Raising one weight never raises another key's floor, but it can hand
    that key a leftover unit it did not get before.
    """
    total = sum(weights.values())
    if total == 0:
        return {key: 0 for key in weights}

    shares = {key: (pool * w) // total for key, w in weights.items()}
    remainders = {key: (pool * w) % total for key, w in weights.items()}
    leftover = pool - sum(shares.values())
    for key in sorted(weights, key=lambda k: (-remainders[k], k))[:leftover]:
        shares[key] += 1
    return shares


def allocate_pmp(topology: Topology, scenario: Scenario, cfg: RadioConfig) -> PmpAllocation:
    """Demand-based RB allocation on the shared pool"""
    demands = {node.id: node.demand_mbps for node in scenario.nodes}
    rates: Dict[int, float] = {}
    required: Dict[int, Optional[int]] = {}
    for edge in topology.edges:
        rates[edge.dst] = edge.metrics.per_rb_rate_bps
        required[edge.dst] = rbs_required(demands[edge.dst] * 1e6, edge.metrics.per_rb_rate_bps)

    satisfiable = {node: req for node, req in required.items() if req is not None}
    zero_rate = [node for node, req in required.items() if req is None]
    total_required = sum(satisfiable.values())

    if total_required <= cfg.n_rbs:
        allocated = dict(satisfiable)
    else:
        allocated = largest_remainder(satisfiable, cfg.n_rbs)
        logger.debug(f"PMP overloaded: {total_required} RBs required, {cfg.n_rbs} available")

    for node in zero_rate:
        allocated[node] = 0
        logger.debug(f"PMP link 0->{node} has zero rate, AP {node} cannot be served")

    per_ap: List[ApAllocation] = []
    for node in sorted(required):
        rate = rates[node]
        served = min(demands[node], allocated[node] * rate / 1e6)
        per_ap.append(
            ApAllocation(
                node_id=node,
                demand_mbps=demands[node],
                rate_bps=rate,
                required_rbs=required[node],
                allocated_rbs=allocated[node],
                served_mbps=served,
            )
        )

    feasible = total_required <= cfg.n_rbs and not zero_rate
    return PmpAllocation(
        per_ap=tuple(per_ap), total_required=total_required, n_rbs=cfg.n_rbs, feasible=feasible
    )


def evaluate_pmp(scenario: Scenario, cfg: RadioConfig) -> EvalResult:
    star = build_pmp(scenario, cfg)
    allocation = allocate_pmp(star, scenario, cfg)

    by_node = {ap.node_id: ap for ap in allocation.per_ap}
    edges = tuple(
        TopologyEdge(
            src=edge.src,
            dst=edge.dst,
            metrics=edge.metrics,
            rbs=float(by_node[edge.dst].allocated_rbs),
            rb_count=by_node[edge.dst].allocated_rbs,
            load_bps=by_node[edge.dst].demand_mbps * 1e6,
        )
        for edge in star.edges
    )
    annotated = Topology(kind=TopologyKind.PMP, n_nodes=star.n_nodes, edges=edges)

    served = allocation.served_per_ap_mbps()
    if allocation.feasible:
        reason, alpha = Reason.OK, 1.0
    else:
        reason = Reason.ZERO_RATE if allocation.has_zero_rate_link else Reason.OVERLOADED
        alpha = min((ap.served_mbps / ap.demand_mbps for ap in allocation.per_ap), default=1.0)

    return EvalResult(
        scenario_seed=scenario.seed,
        topology_kind=TopologyKind.PMP,
        feasible=allocation.feasible,
        served_mbps=served_total(served) if not allocation.feasible else scenario.total_demand_mbps,
        served_per_ap_mbps=served,
        total_demand_mbps=scenario.total_demand_mbps,
        alpha=alpha,
        reason=reason,
        topology=annotated,
    )
