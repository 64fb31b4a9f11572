"""
Multi-hop tree topology

Topology formation is Prim's minimum weight spanning tree grown from the
PoP with two extra rules: a node may only take a child while it sits
less than max_hops from the PoP, and no node (root included) may exceed
max_degree tree neighbors. Edge weight is link distance.

Each tree link carries the demand of every AP below it. The load is
turned into an RB requirement through the link's per-RB rate, and RBs
are assigned by greedy edge multicoloring: links sharing an endpoint get
disjoint RB sets, links that do not touch may reuse RBs.

When the full demand does not fit, every demand is scaled by one factor
alpha, found by bisection, so the served load keeps demand proportions.
"""

from collections import deque
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from loguru import logger

from .errors import InvalidArgumentError
from .radio import LinkMetrics, RadioConfig, link_metrics, rbs_required
from .scenario import POP_ID, Scenario
from .topology import EvalResult, Reason, Topology, TopologyEdge, TopologyKind

DEFAULT_MAX_DEGREE = 4
ALPHA_PRECISION = 1e-3

EdgeKey = Tuple[int, int]


@dataclass(frozen=True)
class TreeEdge:
    parent: int
    child: int
    metrics: LinkMetrics
    weight_km: float

    @property
    def key(self) -> EdgeKey:
        return (self.parent, self.child)


@dataclass(frozen=True)
class Tree:
    """Spanning tree rooted at the PoP. edges are kept in the order Prim added them."""

    n_nodes: int
    parent: Dict[int, int]
    depth: Dict[int, int]
    children: Dict[int, Tuple[int, ...]]
    edges: Tuple[TreeEdge, ...]

    @property
    def total_weight_km(self) -> float:
        return sum(edge.weight_km for edge in self.edges)

    def degree(self, node: int) -> int:
        return len(self.children.get(node, ())) + (0 if node == POP_ID else 1)

    def edge_map(self) -> Dict[EdgeKey, TreeEdge]:
        return {edge.key: edge for edge in self.edges}

    def bfs_edges(self) -> List[TreeEdge]:
        """Edges in BFS order from the root, siblings by child id"""
        by_key = self.edge_map()
        ordered = []
        queue = deque([POP_ID])
        while queue:
            u = queue.popleft()
            for v in self.children.get(u, ()):
                ordered.append(by_key[(u, v)])
                queue.append(v)
        return ordered

    def violations(self, max_hops: int, max_degree: int) -> List[str]:
        """Broken tree invariants, empty when the tree is valid"""
        problems = []
        if len(self.edges) != self.n_nodes - 1:
            problems.append(f"{len(self.edges)} edges for {self.n_nodes} nodes")
        reached = {POP_ID} | {edge.child for edge in self.bfs_edges()}
        if len(reached) != self.n_nodes:
            problems.append(f"only {len(reached)} of {self.n_nodes} nodes reachable from the root")
        for node in range(self.n_nodes):
            if self.depth.get(node, max_hops + 1) > max_hops:
                problems.append(f"node {node} deeper than {max_hops} hops")
            if self.degree(node) > max_degree:
                problems.append(f"node {node} has degree {self.degree(node)} > {max_degree}")
        return problems


@dataclass(frozen=True)
class Stranded:
    """The hop/degree limits left these nodes without a parent"""

    node_ids: Tuple[int, ...]


@dataclass(frozen=True)
class EdgeAllocation:
    required: Dict[EdgeKey, int]
    rb_sets: Dict[EdgeKey, FrozenSet[int]]
    alpha: float = 1.0


def build_constrained_mwst(
    scenario: Scenario,
    cfg: RadioConfig,
    max_hops: int,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> Union[Tree, Stranded]:
    """
    Hop- and degree-limited Prim tree.

    At each step the shortest link from an in-tree node u to an
    out-of-tree node v is added, provided depth(u) + 1 <= max_hops and
    degree(u) < max_degree. Ties go to the smaller (u, v) pair. This is a
    heuristic: the constrained problem is NP-hard.

    Returns Stranded (not an exception) when some node cannot be attached.
    """
    if max_hops < 1:
        raise InvalidArgumentError(f"max_hops must be at least 1, got {max_hops}")
    if max_degree < 1:
        raise InvalidArgumentError(f"max_degree must be at least 1, got {max_degree}")

    dist = scenario.distance_matrix_km()
    n = len(scenario.nodes)
    in_tree = [False] * n
    in_tree[POP_ID] = True
    depth = {POP_ID: 0}
    degree = [0] * n
    parent: Dict[int, int] = {}
    children: Dict[int, List[int]] = {node: [] for node in range(n)}
    edges: List[TreeEdge] = []

    for _ in range(n - 1):
        best: Optional[Tuple[float, int, int]] = None
        for u in sorted(depth):
            if depth[u] + 1 > max_hops or degree[u] >= max_degree:
                continue
            for v in range(n):
                if in_tree[v]:
                    continue
                candidate = (float(dist[u, v]), u, v)
                if best is None or candidate < best:
                    best = candidate
        if best is None:
            break

        weight, u, v = best
        in_tree[v] = True
        depth[v] = depth[u] + 1
        degree[u] += 1
        degree[v] += 1
        parent[v] = u
        children[u].append(v)
        edges.append(
            TreeEdge(
                parent=u,
                child=v,
                metrics=link_metrics(scenario.nodes[u], scenario.nodes[v], cfg),
                weight_km=weight,
            )
        )

    if len(parent) < n - 1:
        stranded = tuple(node for node in range(n) if not in_tree[node])
        logger.debug(f"Tree (hops<={max_hops}, degree<={max_degree}) strands nodes {stranded}")
        return Stranded(node_ids=stranded)

    return Tree(
        n_nodes=n,
        parent=parent,
        depth=depth,
        children={node: tuple(sorted(kids)) for node, kids in children.items()},
        edges=tuple(edges),
    )


def subtree_demands(tree: Tree, scenario: Scenario) -> Dict[EdgeKey, float]:
    """Load on each link (bits/s): the child's demand plus everything below it"""
    below: Dict[int, float] = {}
    loads: Dict[EdgeKey, float] = {}
    for edge in reversed(tree.bfs_edges()):
        v = edge.child
        carried = scenario.nodes[v].demand_bps + sum(below[w] for w in tree.children.get(v, ()))
        below[v] = carried
        loads[edge.key] = carried
    return loads


def color_edges(tree: Tree, required: Dict[EdgeKey, int], n_rbs: int) -> Optional[EdgeAllocation]:
    """
    Greedy edge multicoloring.

    Edges are visited in BFS order; each takes the lowest-indexed RBs not
    used by an already colored edge sharing one of its endpoints.
    Returns None when some edge cannot be filled within n_rbs.
    """
    used_at: Dict[int, set] = {node: set() for node in range(tree.n_nodes)}
    rb_sets: Dict[EdgeKey, FrozenSet[int]] = {}

    for edge in tree.bfs_edges():
        u, v = edge.key
        need = required[edge.key]
        if need < 0:
            raise InvalidArgumentError(f"edge {edge.key} has negative requirement {need}")

        blocked = used_at[u] | used_at[v]
        chosen: List[int] = []
        for rb in range(n_rbs):
            if len(chosen) == need:
                break
            if rb not in blocked:
                chosen.append(rb)
        if len(chosen) < need:
            logger.debug(f"Coloring failed at edge {edge.key}: needs {need}, {len(chosen)} free")
            return None

        assigned = frozenset(chosen)
        rb_sets[edge.key] = assigned
        used_at[u] |= assigned
        used_at[v] |= assigned

    return EdgeAllocation(required=dict(required), rb_sets=rb_sets)


def required_rbs(tree: Tree, loads: Dict[EdgeKey, float], alpha: float = 1.0) -> Dict[EdgeKey, Optional[int]]:
    """RB requirement per link at demands scaled by alpha; None marks a zero-rate link with load"""
    return {
        edge.key: rbs_required(alpha * loads[edge.key], edge.metrics.per_rb_rate_bps)
        for edge in tree.edges
    }


def _try_alpha(tree: Tree, loads: Dict[EdgeKey, float], n_rbs: int, alpha: float) -> Optional[EdgeAllocation]:
    required = required_rbs(tree, loads, alpha)
    if any(need is None for need in required.values()):
        return None
    allocation = color_edges(tree, required, n_rbs)
    if allocation is None:
        return None
    return replace(allocation, alpha=alpha)


def max_alpha(
    tree: Tree,
    loads: Dict[EdgeKey, float],
    n_rbs: int,
    precision: float = ALPHA_PRECISION,
) -> Tuple[float, Optional[EdgeAllocation]]:
    """
    Largest uniform demand scale in (0, 1] that colors, to within precision.

    Returns (1.0, allocation) when full demand fits and (0.0, None) when
    nothing above precision fits.
    """
    full = _try_alpha(tree, loads, n_rbs, 1.0)
    if full is not None:
        return 1.0, full

    lo, hi = 0.0, 1.0
    best: Optional[EdgeAllocation] = None
    while hi - lo > precision:
        mid = (lo + hi) / 2.0
        attempt = _try_alpha(tree, loads, n_rbs, mid)
        if attempt is not None:
            lo, best = mid, attempt
        else:
            hi = mid
    return lo, best


def tree_to_topology(
    tree: Tree,
    kind: TopologyKind,
    loads: Optional[Dict[EdgeKey, float]] = None,
    allocation: Optional[EdgeAllocation] = None,
) -> Topology:
    edges = []
    for edge in tree.bfs_edges():
        rb_set = allocation.rb_sets.get(edge.key) if allocation is not None else None
        count = len(rb_set) if rb_set is not None else 0
        edges.append(
            TopologyEdge(
                src=edge.parent,
                dst=edge.child,
                metrics=edge.metrics,
                rbs=float(count),
                rb_count=count,
                rb_set=rb_set,
                load_bps=loads.get(edge.key) if loads is not None else None,
            )
        )
    return Topology(kind=kind, n_nodes=tree.n_nodes, edges=tuple(edges))


def kind_for_hops(max_hops: int) -> TopologyKind:
    for kind in TopologyKind:
        if kind.max_hops == max_hops:
            return kind
    raise InvalidArgumentError(f"no multi-hop topology tag for max_hops={max_hops} (use 2 or 4)")


def evaluate_multihop(
    scenario: Scenario,
    cfg: RadioConfig,
    max_hops: int,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> EvalResult:
    """Build the tree, allocate RBs and compute served load (uniform alpha when overloaded)"""
    kind = kind_for_hops(max_hops)
    total_demand = scenario.total_demand_mbps

    tree = build_constrained_mwst(scenario, cfg, max_hops, max_degree)
    if isinstance(tree, Stranded):
        return EvalResult(
            scenario_seed=scenario.seed,
            topology_kind=kind,
            feasible=False,
            served_mbps=0.0,
            served_per_ap_mbps={ap.id: 0.0 for ap in scenario.aps},
            total_demand_mbps=total_demand,
            alpha=0.0,
            reason=Reason.UNREACHABLE,
        )

    loads = subtree_demands(tree, scenario)
    alpha, allocation = max_alpha(tree, loads, cfg.n_rbs)
    topology = tree_to_topology(tree, kind, loads, allocation)

    if alpha == 1.0:
        return EvalResult(
            scenario_seed=scenario.seed,
            topology_kind=kind,
            feasible=True,
            served_mbps=total_demand,
            served_per_ap_mbps={ap.id: ap.demand_mbps for ap in scenario.aps},
            total_demand_mbps=total_demand,
            alpha=1.0,
            topology=topology,
        )

    zero_rate = any(
        loads[edge.key] > 0 and not edge.metrics.usable for edge in tree.edges
    )
    served = {ap.id: alpha * ap.demand_mbps for ap in scenario.aps}
    logger.debug(f"{kind.value}: overloaded, alpha={alpha:.4f}")
    return EvalResult(
        scenario_seed=scenario.seed,
        topology_kind=kind,
        feasible=False,
        served_mbps=alpha * total_demand,
        served_per_ap_mbps=served,
        total_demand_mbps=total_demand,
        alpha=alpha,
        reason=Reason.ZERO_RATE if zero_rate else Reason.OVERLOADED,
        topology=topology,
    )
