"""
Monte Carlo experiment harness

A batch is the cross product of AP counts and area sizes, with
n_scenarios random deployments each. Every requested topology is
evaluated on the same deployments, and each record carries the scenario
hash so that identity can be checked afterwards.

Scenario seeds come from the batch's master seed through a splitmix64
step (see derive_seed), so any single scenario can be regenerated from
(master_seed, scenario_index) alone. Evaluations may run in worker
processes; results are reassembled in scenario-index order, so the output
does not depend on how many workers ran.
"""

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from .config import FilterMode, RunConfig
from .errors import EmptySelectionError, InvalidArgumentError
from .logging_config import silence
from .lpopt import evaluate_lp
from .multihop import evaluate_multihop
from .pmp import evaluate_pmp
from .radio import RadioConfig
from .scenario import Scenario, generate_scenario, scenario_hash
from .topology import EvalResult, TopologyKind

MASK64 = (1 << 64) - 1
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15

RECORD_COLUMNS = [
    "master_seed",
    "scenario_index",
    "scenario_seed",
    "n_aps",
    "area_km",
    "topology",
    "feasible",
    "alpha",
    "total_demand_mbps",
    "served_mbps",
    "excluded",
    "scenario_hash",
]

SUMMARY_COLUMNS = [
    "n_aps",
    "area_km",
    "topology",
    "scenarios",
    "feasible_pct",
    "mean_served_mbps",
    "mean_demand_mbps",
    "mean_edge_count",
]


def derive_seed(master_seed: int, index: int) -> int:
    """
    splitmix64 output for stream position index + 1:

        z = master_seed + (index + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        seed = z ^ (z >> 31)
    """
    z = (master_seed + (index + 1) * SPLITMIX_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ScenarioTask:
    index: int
    n_aps: int
    area_km: float


@dataclass(frozen=True)
class ScenarioRecord:
    """One (scenario, topology) outcome, flattened for CSV output"""

    master_seed: int
    scenario_index: int
    scenario_seed: int
    n_aps: int
    area_km: float
    topology: TopologyKind
    feasible: bool
    alpha: Optional[float]
    total_demand_mbps: float
    served_mbps: float
    excluded: bool
    scenario_hash: str
    edge_count: int = 0


@dataclass(frozen=True)
class CdfResult:
    samples: np.ndarray
    points: List[Tuple[float, float]]


@dataclass
class BatchSummary:
    table: pd.DataFrame
    cdfs: Dict[TopologyKind, CdfResult]


@dataclass
class BatchResult:
    records: List[ScenarioRecord]
    summary: BatchSummary


def evaluate_topology(
    scenario: Scenario,
    kind: TopologyKind,
    cfg: RadioConfig,
    lp_partial_service: bool = False,
) -> EvalResult:
    if kind is TopologyKind.PMP:
        return evaluate_pmp(scenario, cfg)
    if kind is TopologyKind.LP:
        return evaluate_lp(scenario, cfg, partial_service=lp_partial_service)
    return evaluate_multihop(scenario, cfg, kind.max_hops)


def plan_tasks(config: RunConfig) -> List[ScenarioTask]:
    """Scenario indices run over N, then area, then repetition"""
    experiment = config.experiment
    tasks = []
    for n_aps in experiment.n_aps_list:
        for area in experiment.area_list:
            for _ in range(experiment.n_scenarios):
                tasks.append(ScenarioTask(index=len(tasks), n_aps=n_aps, area_km=area))
    return tasks


def evaluate_task(task: ScenarioTask, config: RunConfig) -> List[ScenarioRecord]:
    experiment = config.experiment
    seed = derive_seed(experiment.master_seed, task.index)
    scenario = generate_scenario(
        task.n_aps,
        task.area_km,
        experiment.demand_set_mbps,
        seed,
        pop_at_center=experiment.pop_at_center,
    )
    digest = scenario_hash(scenario)

    records = []
    for kind in experiment.topologies:
        result = evaluate_topology(scenario, kind, config.radio_for(kind), experiment.lp_partial_service)
        records.append(
            ScenarioRecord(
                master_seed=experiment.master_seed,
                scenario_index=task.index,
                scenario_seed=seed,
                n_aps=task.n_aps,
                area_km=task.area_km,
                topology=kind,
                feasible=result.feasible,
                alpha=result.alpha,
                total_demand_mbps=result.total_demand_mbps,
                served_mbps=result.served_mbps,
                excluded=result.excluded,
                scenario_hash=digest,
                edge_count=result.edge_count,
            )
        )
    return records


def run_batch(config: RunConfig, threads: int = 1) -> BatchResult:
    """
    Evaluate every requested topology on every scenario of the batch.

    Args:
        config: Radio parameters and batch shape (AP counts, areas,
            scenarios per cell, topologies, master seed, filter mode)
        threads: Worker process cap; 1 evaluates in-process

    Returns:
        Records ordered by (scenario_index, topology) plus the summary
    """
    if threads < 1:
        raise InvalidArgumentError(f"threads must be at least 1, got {threads}")

    tasks = plan_tasks(config)
    worker = functools.partial(evaluate_task, config=config)
    logger.info(
        f"🚀 Batch: {len(tasks)} scenarios x {len(config.experiment.topologies)} topologies on {threads} worker(s)"
    )

    records: List[ScenarioRecord] = []
    step = max(1, len(tasks) // 10)
    if threads == 1:
        outcomes: Iterable[List[ScenarioRecord]] = map(worker, tasks)
        records = _collect(outcomes, len(tasks), step)
    else:
        chunksize = max(1, len(tasks) // (threads * 8))
        with ProcessPoolExecutor(max_workers=threads, initializer=silence) as pool:
            records = _collect(pool.map(worker, tasks, chunksize=chunksize), len(tasks), step)

    summary = summarize(records, config.experiment.filter)
    logger.info(f"✅ Batch complete: {len(records)} records")
    return BatchResult(records=records, summary=summary)


def _collect(outcomes: Iterable[List[ScenarioRecord]], total: int, step: int) -> List[ScenarioRecord]:
    records: List[ScenarioRecord] = []
    for done, batch in enumerate(outcomes, 1):
        records.extend(batch)
        if done % step == 0 or done == total:
            logger.info(f"   {done}/{total} scenarios evaluated")
    return records


def mutually_feasible_indices(
    records: Sequence[ScenarioRecord], topologies: Optional[Iterable[TopologyKind]] = None
) -> set:
    """Scenario indices feasible under every compared topology"""
    compared = set(topologies) if topologies is not None else {r.topology for r in records}
    feasible: Dict[int, set] = {}
    for record in records:
        if record.topology in compared and record.feasible:
            feasible.setdefault(record.scenario_index, set()).add(record.topology)
    return {index for index, kinds in feasible.items() if kinds >= compared}


def select(
    records: Sequence[ScenarioRecord],
    topology: Optional[TopologyKind] = None,
    filter: FilterMode = "all",
    compared: Optional[Iterable[TopologyKind]] = None,
) -> List[ScenarioRecord]:
    """Records entering served-load statistics (LP-infeasible exclusions dropped)"""
    chosen = [r for r in records if not r.excluded and (topology is None or r.topology is topology)]
    if filter == "mutually-feasible":
        keep = mutually_feasible_indices(records, compared)
        chosen = [r for r in chosen if r.scenario_index in keep]
    elif filter != "all":
        raise InvalidArgumentError(f"unknown filter {filter!r}")
    return chosen


def served_load_cdf(
    records: Sequence[ScenarioRecord],
    topology: Optional[TopologyKind] = None,
    filter: FilterMode = "all",
    compared: Optional[Iterable[TopologyKind]] = None,
) -> CdfResult:
    """Empirical CDF F(x) = #(served <= x) / n over the selected records"""
    chosen = select(records, topology, filter, compared)
    if not chosen:
        raise EmptySelectionError(f"no records for topology={topology} filter={filter}")

    samples = np.sort(np.array([r.served_mbps for r in chosen], dtype=float))
    values, counts = np.unique(samples, return_counts=True)
    cumulative = np.cumsum(counts) / samples.size
    points = [(float(x), float(f)) for x, f in zip(values, cumulative)]
    return CdfResult(samples=samples, points=points)


def feasibility_rate(records: Sequence[ScenarioRecord], topology: TopologyKind) -> float:
    """Percentage of scenarios fully served by the topology"""
    chosen = [r for r in records if r.topology is topology]
    if not chosen:
        raise EmptySelectionError(f"no records for topology {topology.value}")
    return 100.0 * sum(1 for r in chosen if r.feasible) / len(chosen)


def records_frame(records: Sequence[ScenarioRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        row = asdict(record)
        row["topology"] = record.topology.value
        rows.append(row)
    return pd.DataFrame(rows, columns=RECORD_COLUMNS + ["edge_count"])


def summarize(records: Sequence[ScenarioRecord], filter: FilterMode = "all") -> BatchSummary:
    """
    Per (N, area, topology): scenario count, feasibility %, mean served
    load (over the filtered, non-excluded records), mean demand and mean
    link count. Plus one served-load CDF per topology.
    """
    frame = records_frame(records)
    if frame.empty:
        return BatchSummary(table=pd.DataFrame(columns=SUMMARY_COLUMNS), cdfs={})

    served_keys = {(r.scenario_index, r.topology.value) for r in select(records, None, filter)}
    frame["counted"] = [
        (index, kind) in served_keys for index, kind in zip(frame["scenario_index"], frame["topology"])
    ]
    frame["served_counted"] = frame["served_mbps"].where(frame["counted"])

    order = {kind.value: position for position, kind in enumerate(TopologyKind)}
    grouped = frame.groupby(["n_aps", "area_km", "topology"], sort=False)
    table = grouped.agg(
        scenarios=("scenario_index", "size"),
        feasible_pct=("feasible", lambda s: 100.0 * s.sum() / len(s)),
        mean_served_mbps=("served_counted", "mean"),
        mean_demand_mbps=("total_demand_mbps", "mean"),
        mean_edge_count=("edge_count", "mean"),
    ).reset_index()
    table["_order"] = table["topology"].map(order)
    table = table.sort_values(["n_aps", "area_km", "_order"], kind="stable").drop(columns="_order")
    table = table.reset_index(drop=True)[SUMMARY_COLUMNS]

    cdfs: Dict[TopologyKind, CdfResult] = {}
    for kind in TopologyKind:
        if any(r.topology is kind for r in records):
            try:
                cdfs[kind] = served_load_cdf(records, kind, filter)
            except EmptySelectionError:
                logger.warning(f"No {kind.value} records left for the served-load CDF after filtering")
    return BatchSummary(table=table, cdfs=cdfs)
