"""
Middle Mile Planner
TV UHF LTE-A backhaul topologies for rural Wi-Fi access networks.
"""

from .config import PlannerSettings, RunConfig, load_run_config
from .evaluation import derive_seed, run_batch, served_load_cdf, summarize
from .lpopt import evaluate_lp, solve_topology
from .multihop import build_constrained_mwst, evaluate_multihop
from .pmp import evaluate_pmp
from .radio import RadioConfig, link_metrics
from .scenario import Scenario, generate_scenario, load_scenario, save_scenario
from .topology import EvalResult, Topology, TopologyKind

__version__ = "0.3.0"
__all__ = [
    "Scenario",
    "generate_scenario",
    "load_scenario",
    "save_scenario",
    "RadioConfig",
    "link_metrics",
    # Topologies
    "TopologyKind",
    "Topology",
    "EvalResult",
    "evaluate_pmp",
    "build_constrained_mwst",
    "evaluate_multihop",
    "solve_topology",
    "evaluate_lp",
    # Experiments
    "PlannerSettings",
    "RunConfig",
    "load_run_config",
    "derive_seed",
    "run_batch",
    "served_load_cdf",
    "summarize",
]
