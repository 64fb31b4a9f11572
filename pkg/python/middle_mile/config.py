"""
Configuration for the planner.

Two layers:
- PlannerSettings: process-level knobs from the environment (and a
  `.env` file in the working directory), e.g. MMP_THREADS.
- RunConfig: the JSON experiment file (radio parameters, batch shape,
  output directory). Command-line flags override file values.
"""

import json
import os
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .radio import RadioConfig
from .scenario import DEFAULT_DEMAND_SET_MBPS
from .topology import ALL_TOPOLOGIES, TopologyKind

VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

FilterMode = Literal["all", "mutually-feasible"]


class PlannerSettings:
    """Settings read from the environment."""

    def __init__(self):
        """Initialize settings from environment or defaults."""
        load_dotenv(find_dotenv(usecwd=True), override=False)

        # Evaluator parallelism cap
        threads = os.getenv("MMP_THREADS")
        if threads is None or threads.strip() == "":
            self.threads = os.cpu_count() or 1
        else:
            try:
                self.threads = int(threads)
            except ValueError:
                raise ValueError(f"Invalid MMP_THREADS: {threads!r}. Must be a positive integer")
            if self.threads < 1:
                raise ValueError(f"Invalid MMP_THREADS: {threads!r}. Must be a positive integer")

        self.log_level = os.getenv("MMP_LOG_LEVEL", "INFO").upper()
        if self.log_level not in VALID_LOG_LEVELS:
            raise ValueError(f"Invalid MMP_LOG_LEVEL: {self.log_level}. Must be one of {VALID_LOG_LEVELS}")

        # Optional rotating debug log for long batches
        self.log_file = os.getenv("MMP_LOG_FILE") or None


class GainOverride(BaseModel):
    """Antenna gains for one topology (omni for PMP, directional for multi-hop)"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    tx_gain_dbi: Optional[float] = None
    rx_gain_dbi: Optional[float] = None


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    n_aps_list: Tuple[int, ...] = tuple(range(2, 11))
    area_list: Tuple[float, ...] = (10.0,)
    n_scenarios: int = Field(default=2000, ge=1)
    topologies: Tuple[TopologyKind, ...] = ALL_TOPOLOGIES
    master_seed: int = Field(default=1, ge=0, lt=2**64)
    filter: FilterMode = "all"
    demand_set_mbps: Tuple[float, ...] = DEFAULT_DEMAND_SET_MBPS
    pop_at_center: bool = False
    lp_partial_service: bool = False

    @field_validator("n_aps_list")
    @classmethod
    def _positive_counts(cls, value):
        if not value or any(n < 1 for n in value):
            raise ValueError("n_aps_list needs at least one entry and every entry must be >= 1")
        return value

    @field_validator("area_list", "demand_set_mbps")
    @classmethod
    def _positive_values(cls, value):
        if not value or any(v <= 0 for v in value):
            raise ValueError("needs at least one entry and every entry must be positive")
        return value

    @field_validator("topologies")
    @classmethod
    def _unique_topologies(cls, value):
        if not value:
            raise ValueError("at least one topology is required")
        # Canonical order keeps records and CSVs stable
        return tuple(kind for kind in ALL_TOPOLOGIES if kind in set(value))


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    radio: RadioConfig = RadioConfig()
    gains: Dict[TopologyKind, GainOverride] = Field(default_factory=dict)
    experiment: ExperimentConfig = ExperimentConfig()
    output_dir: str = "results"

    def radio_for(self, kind: TopologyKind) -> RadioConfig:
        """Effective radio parameters for one topology"""
        override = self.gains.get(kind)
        if override is None:
            return self.radio
        update = {key: value for key, value in override.model_dump().items() if value is not None}
        return self.radio.model_copy(update=update)

    @classmethod
    def baseline(cls) -> "RunConfig":
        """N = 2..10 in a 10 km square, 2000 scenarios per N"""
        return cls()

    @classmethod
    def area_sweep(cls) -> "RunConfig":
        """N = 10 over 5, 10, 15 and 20 km squares"""
        return cls(experiment=ExperimentConfig(n_aps_list=(10,), area_list=(5.0, 10.0, 15.0, 20.0)))

    def with_overrides(self, **experiment_updates) -> "RunConfig":
        """Copy with experiment fields replaced (None values are ignored)"""
        updates = {key: value for key, value in experiment_updates.items() if value is not None}
        if not updates:
            return self
        try:
            experiment = ExperimentConfig.model_validate({**self.experiment.model_dump(), **updates})
        except ValidationError as e:
            raise ConfigError(_describe(e)) from e
        return self.model_copy(update={"experiment": experiment})


def parse_run_config(document: Union[str, bytes, dict]) -> RunConfig:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigError(_describe(e)) from e


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run configuration"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_run_config(raw)


def _describe(error: ValidationError) -> str:
    lines: List[str] = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ())) or "config"
        lines.append(f"{location}: {item['msg']}")
    return "invalid config: " + "; ".join(lines)
