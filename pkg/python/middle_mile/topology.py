"""
Topology and evaluation result types shared by the PMP, multi-hop and
LP planners.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, FrozenSet, List, Optional, Tuple

from .radio import LinkMetrics
from .scenario import POP_ID

if TYPE_CHECKING:
    from .lpopt import UtilityMatrix


class TopologyKind(str, Enum):
    PMP = "pmp"
    MH2 = "mh2"
    MH4 = "mh4"
    LP = "lp"

    @property
    def max_hops(self) -> Optional[int]:
        return {TopologyKind.MH2: 2, TopologyKind.MH4: 4}.get(self)


ALL_TOPOLOGIES: Tuple[TopologyKind, ...] = tuple(TopologyKind)


class Reason(str, Enum):
    OK = "ok"
    OVERLOADED = "overloaded"
    UNREACHABLE = "unreachable"
    ZERO_RATE = "zero-rate"
    LP_INFEASIBLE = "lp-infeasible"


@dataclass(frozen=True)
class TopologyEdge:
    """
    A directed link with its resource allocation.

    rbs is the real-valued allocation (beta * n_rbs for LP edges),
    rb_count the integer RBs reported for the link.
    """

    src: int
    dst: int
    metrics: LinkMetrics
    rbs: float = 0.0
    rb_count: int = 0
    rb_set: Optional[FrozenSet[int]] = None
    load_bps: Optional[float] = None
    beta: Optional[float] = None


@dataclass(frozen=True)
class Topology:
    kind: TopologyKind
    n_nodes: int
    edges: Tuple[TopologyEdge, ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> Dict[int, int]:
        """Undirected degree per node (both link directions count)"""
        degree = {node: 0 for node in range(self.n_nodes)}
        for edge in self.edges:
            degree[edge.src] += 1
            degree[edge.dst] += 1
        return degree

    def depths(self) -> Dict[int, int]:
        """Hop count from the PoP along directed edges; unreachable nodes are absent."""
        adjacency: Dict[int, List[int]] = {}
        for edge in self.edges:
            adjacency.setdefault(edge.src, []).append(edge.dst)

        depth = {POP_ID: 0}
        queue = deque([POP_ID])
        while queue:
            u = queue.popleft()
            for v in sorted(adjacency.get(u, [])):
                if v not in depth:
                    depth[v] = depth[u] + 1
                    queue.append(v)
        return depth

    @property
    def is_tree(self) -> bool:
        """N edges reaching every node from the PoP"""
        return self.edge_count == self.n_nodes - 1 and len(self.depths()) == self.n_nodes

    def edge(self, src: int, dst: int) -> Optional[TopologyEdge]:
        for e in self.edges:
            if e.src == src and e.dst == dst:
                return e
        return None


@dataclass
class EvalResult:
    """Outcome of one topology on one scenario"""

    scenario_seed: int
    topology_kind: TopologyKind
    feasible: bool
    served_mbps: float
    served_per_ap_mbps: Dict[int, float]
    total_demand_mbps: float
    alpha: Optional[float]
    reason: Reason = Reason.OK
    excluded: bool = False
    topology: Optional[Topology] = field(default=None, repr=False)
    # LP only: the beta matrix behind topology
    utility: Optional["UtilityMatrix"] = field(default=None, repr=False)

    @property
    def served_fraction(self) -> float:
        if self.total_demand_mbps <= 0:
            return 0.0
        return self.served_mbps / self.total_demand_mbps

    @property
    def edge_count(self) -> int:
        return self.topology.edge_count if self.topology is not None else 0


def served_total(served_per_ap_mbps: Dict[int, float]) -> float:
    return math.fsum(served_per_ap_mbps.values())
