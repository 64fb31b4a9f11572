"""
Middle Mile Planner - command line

    middle-mile gen    --n-aps 10 --area-km 10 --seed 42 --out scenario.json
    middle-mile plan   --scenario scenario.json --topology mh4 [--dump-lp]
    middle-mile batch  --config run.json [--out results/] [--filter mutually-feasible]

Exit codes: 0 success (infeasible plans included), 1 usage, config or
input error, 2 multi-hop plan with a node the tree cannot reach.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger
from rich.console import Console
from rich.table import Table

from .config import PlannerSettings, RunConfig, load_run_config
from .errors import PlannerError
from .evaluation import evaluate_topology, run_batch
from .logging_config import log_stage, setup_logging
from .lpopt import build_lp_model, dump_utility
from .lp_solver import dump_model
from .scenario import DEFAULT_DEMAND_SET_MBPS, generate_scenario, load_scenario, save_scenario, scenario_hash
from .storage import atomic_write_bytes, write_batch_outputs, write_plan_report
from .topology import EvalResult, Reason, TopologyKind

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNREACHABLE = 2

TOPOLOGY_CHOICES = [kind.value for kind in TopologyKind]

stdout = Console()


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 is reserved for unreachable plans here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="middle-mile",
        description="Middle Mile Planner - PMP, multi-hop and LP backhaul topologies over TV UHF",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level (default: MMP_LOG_LEVEL or INFO)",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="Generate a random deployment scenario")
    gen.add_argument("--n-aps", type=int, required=True, help="Number of Wi-Fi AP sites")
    gen.add_argument("--area-km", type=float, default=10.0, help="Side of the square area in km (default: 10)")
    gen.add_argument("--seed", type=int, required=True, help="64-bit scenario seed")
    gen.add_argument("--out", required=True, help="Scenario JSON file to write")
    gen.add_argument(
        "--demand-set",
        type=float,
        nargs="+",
        default=list(DEFAULT_DEMAND_SET_MBPS),
        help="Allowed AP demands in Mbps (default: 2 4 6 8 10)",
    )
    gen.add_argument("--pop-at-center", action="store_true", help="Pin the PoP to the area center")

    plan = sub.add_parser("plan", help="Build and evaluate one topology on a scenario file")
    plan.add_argument("--scenario", required=True, help="Scenario JSON file")
    plan.add_argument("--topology", required=True, choices=TOPOLOGY_CHOICES, help="Topology to build")
    plan.add_argument("--config", default=None, help="Run config JSON (radio parameters, gains)")
    plan.add_argument("--out", default=None, help="Report JSON path (default: <scenario>.<topology>.report.json)")
    plan.add_argument("--dump-lp", action="store_true", help="Print the LP model and utility matrix (lp only)")

    batch = sub.add_parser("batch", help="Run a Monte Carlo batch and write CSV results")
    batch.add_argument("--config", default=None, help="Run config JSON (default: baseline preset)")
    batch.add_argument(
        "--preset",
        choices=["baseline", "area-sweep"],
        default=None,
        help="Built-in config when --config is not given (default: baseline)",
    )
    batch.add_argument("--out", default=None, help="Output directory (overrides the config)")
    batch.add_argument("--seed", type=int, default=None, help="Master seed (overrides the config)")
    batch.add_argument("--scenarios", type=int, default=None, help="Scenarios per (N, area) cell")
    batch.add_argument(
        "--topology",
        action="append",
        choices=TOPOLOGY_CHOICES,
        default=None,
        help="Topology to evaluate; repeat for several (overrides the config)",
    )
    batch.add_argument(
        "--filter",
        choices=["all", "mutually-feasible"],
        default=None,
        help="Records entering served-load statistics (overrides the config)",
    )
    return parser


@log_stage("🛰️  SCENARIO GENERATION")
def cmd_gen(args) -> int:
    scenario = generate_scenario(
        args.n_aps, args.area_km, args.demand_set, args.seed, pop_at_center=args.pop_at_center
    )
    path = atomic_write_bytes(args.out, save_scenario(scenario))
    logger.info(f"🗺️  {scenario.n_aps} APs in {scenario.area_km} km square, seed {scenario.seed}")
    logger.info(f"💾 Scenario written to {path}")
    return EXIT_OK


@log_stage("📡 TOPOLOGY PLAN")
def cmd_plan(args) -> int:
    scenario_path = Path(args.scenario)
    try:
        raw = scenario_path.read_bytes()
    except OSError as e:
        logger.error(f"❌ Cannot read scenario {scenario_path}: {e}")
        return EXIT_ERROR
    scenario = load_scenario(raw)

    config = load_run_config(args.config) if args.config else RunConfig()
    kind = TopologyKind(args.topology)
    radio = config.radio_for(kind)

    result = evaluate_topology(scenario, kind, radio, config.experiment.lp_partial_service)
    report = build_report(scenario, result)

    if kind is TopologyKind.LP:
        # scaled beta when partial service settled below full demand
        utility = result.utility
        if utility is not None:
            report["utility"] = [[float(b) for b in row] for row in utility.beta]
        if args.dump_lp:
            stdout.print(dump_model(build_lp_model(scenario, radio)), markup=False, highlight=False)
            if utility is not None:
                stdout.print(dump_utility(utility), markup=False, highlight=False)

    print_report(report)
    out = Path(args.out) if args.out else scenario_path.with_name(f"{scenario_path.stem}.{kind.value}.report.json")
    write_plan_report(out, report)
    logger.info(f"💾 Report written to {out}")

    if result.reason is Reason.UNREACHABLE:
        logger.warning("⚠️  Hop/degree limits leave nodes unreachable")
        return EXIT_UNREACHABLE
    return EXIT_OK


@log_stage("🎲 MONTE CARLO BATCH")
def cmd_batch(args, settings: PlannerSettings) -> int:
    if args.config:
        config = load_run_config(args.config)
    elif args.preset == "area-sweep":
        config = RunConfig.area_sweep()
    else:
        config = RunConfig.baseline()

    config = config.with_overrides(
        master_seed=args.seed,
        n_scenarios=args.scenarios,
        topologies=args.topology,
        filter=args.filter,
    )
    if args.out:
        config = config.model_copy(update={"output_dir": args.out})

    result = run_batch(config, threads=settings.threads)
    write_batch_outputs(config.output_dir, result.records, result.summary)
    print_summary(result.summary.table)
    return EXIT_OK


def _rb_ranges(rb_set) -> List[List[int]]:
    """Compress sorted RB indices into inclusive [start, end] runs"""
    ranges: List[List[int]] = []
    for rb in sorted(rb_set):
        if ranges and rb == ranges[-1][1] + 1:
            ranges[-1][1] = rb
        else:
            ranges.append([rb, rb])
    return ranges


def build_report(scenario, result: EvalResult) -> Dict[str, Any]:
    """Machine-readable plan report"""
    report: Dict[str, Any] = {
        "scenario_hash": scenario_hash(scenario),
        "seed": scenario.seed,
        "n_aps": scenario.n_aps,
        "area_km": scenario.area_km,
        "topology": result.topology_kind.value,
        "feasible": result.feasible,
        "reason": result.reason.value,
        "alpha": result.alpha,
        "excluded": result.excluded,
        "total_demand_mbps": result.total_demand_mbps,
        "served_mbps": result.served_mbps,
        "served_per_ap_mbps": {str(node): served for node, served in sorted(result.served_per_ap_mbps.items())},
        "edges": [],
    }
    topology = result.topology
    if topology is None:
        return report

    depths = topology.depths()
    report["edge_count"] = topology.edge_count
    report["is_tree"] = topology.is_tree
    report["depths"] = {str(node): depth for node, depth in sorted(depths.items())}
    for edge in topology.edges:
        entry: Dict[str, Any] = {
            "src": edge.src,
            "dst": edge.dst,
            "distance_m": edge.metrics.distance_m,
            "snr_db": edge.metrics.snr_db,
            "per_rb_rate_bps": edge.metrics.per_rb_rate_bps,
            "capacity_bps": edge.metrics.capacity_bps,
            "rbs": edge.rbs,
            "rb_count": edge.rb_count,
        }
        if edge.load_bps is not None:
            entry["load_mbps"] = edge.load_bps / 1e6
        if edge.rb_set is not None:
            entry["rb_ranges"] = _rb_ranges(edge.rb_set)
        if edge.beta is not None:
            entry["beta"] = edge.beta
        report["edges"].append(entry)
    return report


def print_report(report: Dict[str, Any]):
    status = "[green]feasible[/green]" if report["feasible"] else f"[red]infeasible[/red] ({report['reason']})"
    stdout.print(f"[bold]{report['topology']}[/bold] on {report['n_aps']} APs, seed {report['seed']}: {status}")

    if report["edges"]:
        table = Table(title="Links")
        for column in ["src", "dst", "depth", "km", "SNR dB", "Mbps/RB", "load Mbps", "RBs"]:
            table.add_column(column, justify="right")
        depths = report.get("depths", {})
        for edge in report["edges"]:
            table.add_row(
                str(edge["src"]),
                str(edge["dst"]),
                str(depths.get(str(edge["dst"]), "-")),
                f"{edge['distance_m'] / 1000:.2f}",
                f"{edge['snr_db']:.1f}",
                f"{edge['per_rb_rate_bps'] / 1e6:.3f}",
                f"{edge['load_mbps']:.2f}" if "load_mbps" in edge else "-",
                f"{edge['rbs']:.2f}" if "beta" in edge else str(edge["rb_count"]),
            )
        stdout.print(table)

    served = Table(title="Served load")
    served.add_column("AP", justify="right")
    served.add_column("Mbps", justify="right")
    for node, mbps in report["served_per_ap_mbps"].items():
        served.add_row(node, f"{mbps:.3f}")
    stdout.print(served)

    alpha = report["alpha"]
    alpha_text = "-" if alpha is None else f"{alpha:.4f}"
    stdout.print(
        f"served {report['served_mbps']:.3f} of {report['total_demand_mbps']:.3f} Mbps, alpha {alpha_text}"
    )


def print_summary(table):
    view = Table(title="Batch summary")
    for column in table.columns:
        view.add_column(str(column), justify="right")
    for row in table.itertuples(index=False):
        view.add_row(*[f"{value:.6g}" if isinstance(value, float) else str(value) for value in row])
    stdout.print(view)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for the middle-mile command"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = PlannerSettings()
    except ValueError as e:
        setup_logging("INFO")
        logger.error(f"❌ {e}")
        return EXIT_ERROR

    setup_logging(args.log_level or settings.log_level, settings.log_file)

    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "plan":
            return cmd_plan(args)
        return cmd_batch(args, settings)
    except PlannerError as e:
        logger.error(f"❌ {e}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        logger.info("💫 Interrupted")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
