"""
Deployment Scenarios

A scenario is one random middle mile deployment: an optical PoP (node 0,
hosting the eNB) and N Wi-Fi AP sites with static downlink demands, all
inside an L x L km square.

Scenarios are pure values. Generation is a function of its arguments
only, driven by a PCG64 stream with a fixed draw order:

1. positions, PoP first then APs by id, x before y for each node
2. demand picks, APs by id

so a seed reproduces the same deployment on every platform.
"""

import hashlib
import json
import math
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import InvalidArgumentError, ScenarioParseError, ScenarioValidationError

DEFAULT_DEMAND_SET_MBPS: Tuple[float, ...] = (2.0, 4.0, 6.0, 8.0, 10.0)

SEED_LIMIT = 2**64

POP_ID = 0


class Node(BaseModel):
    """A site in the deployment. Node 0 is the PoP/eNB, the rest are AP/RN sites."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    id: int = Field(ge=0)
    x_km: float
    y_km: float
    demand_mbps: float = Field(ge=0.0)

    @property
    def is_pop(self) -> bool:
        return self.id == POP_ID

    @property
    def demand_bps(self) -> float:
        return self.demand_mbps * 1e6


class Scenario(BaseModel):
    """PoP plus N AP sites in an area_km x area_km square"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    area_km: float = Field(gt=0.0)
    seed: int = Field(ge=0, lt=SEED_LIMIT)
    demand_set_mbps: Tuple[float, ...]
    nodes: Tuple[Node, ...]

    @model_validator(mode="after")
    def _check_invariants(self) -> "Scenario":
        if not self.demand_set_mbps:
            raise ValueError("demand_set_mbps must not be empty")
        if any(d <= 0 for d in self.demand_set_mbps):
            raise ValueError("demand_set_mbps entries must be positive")
        if len(self.nodes) < 2:
            raise ValueError("a scenario needs the PoP and at least one AP")

        for expected_id, node in enumerate(self.nodes):
            if node.id != expected_id:
                raise ValueError(f"node ids must be 0..N in order, found {node.id} at position {expected_id}")
            if not (0.0 <= node.x_km <= self.area_km and 0.0 <= node.y_km <= self.area_km):
                raise ValueError(f"node {node.id} lies outside the {self.area_km} km square")
            if node.is_pop:
                if node.demand_mbps != 0.0:
                    raise ValueError(f"PoP demand must be 0, got {node.demand_mbps}")
            elif node.demand_mbps not in self.demand_set_mbps:
                raise ValueError(f"node {node.id} demand {node.demand_mbps} is not in the demand set")
        return self

    @property
    def n_aps(self) -> int:
        return len(self.nodes) - 1

    @property
    def pop(self) -> Node:
        return self.nodes[POP_ID]

    @property
    def aps(self) -> Tuple[Node, ...]:
        return self.nodes[1:]

    @property
    def total_demand_mbps(self) -> float:
        return math.fsum(node.demand_mbps for node in self.aps)

    def demands_bps(self) -> np.ndarray:
        """Demand vector indexed by node id (entry 0 is the PoP's zero)"""
        return np.array([node.demand_bps for node in self.nodes], dtype=float)

    def positions_km(self) -> np.ndarray:
        return np.array([[node.x_km, node.y_km] for node in self.nodes], dtype=float)

    def distance_matrix_km(self) -> np.ndarray:
        """Pairwise Euclidean distances, shape (N+1, N+1)"""
        pos = self.positions_km()
        diff = pos[:, None, :] - pos[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))


def generate_scenario(
    n_aps: int,
    area_km: float,
    demand_set_mbps: Sequence[float] = DEFAULT_DEMAND_SET_MBPS,
    seed: int = 0,
    pop_at_center: bool = False,
) -> Scenario:
    """
    Draw a random deployment.

    Args:
        n_aps: Number of AP sites, at least 1
        area_km: Side of the square area
        demand_set_mbps: Demands are picked uniformly from this set
        seed: 64-bit seed for the PCG64 stream
        pop_at_center: Pin the PoP to the area center. The PoP position
            is still drawn (and discarded) so AP placements match the
            random-PoP scenario with the same seed.

    Returns:
        A validated Scenario
    """
    if not isinstance(n_aps, (int, np.integer)) or n_aps < 1:
        raise InvalidArgumentError(f"n_aps must be a positive integer, got {n_aps!r}")
    if not math.isfinite(area_km) or area_km <= 0:
        raise InvalidArgumentError(f"area_km must be positive, got {area_km!r}")
    demand_set = tuple(float(d) for d in demand_set_mbps)
    if not demand_set:
        raise InvalidArgumentError("demand_set_mbps must not be empty")
    if any(not math.isfinite(d) or d <= 0 for d in demand_set):
        raise InvalidArgumentError(f"demand_set_mbps entries must be positive, got {demand_set}")
    if not 0 <= seed < SEED_LIMIT:
        raise InvalidArgumentError(f"seed must fit in 64 unsigned bits, got {seed}")

    rng = np.random.Generator(np.random.PCG64(int(seed)))
    positions = rng.uniform(0.0, area_km, size=(n_aps + 1, 2))
    picks = rng.integers(0, len(demand_set), size=n_aps)

    if pop_at_center:
        positions[0] = (area_km / 2.0, area_km / 2.0)

    nodes = [Node(id=0, x_km=float(positions[0, 0]), y_km=float(positions[0, 1]), demand_mbps=0.0)]
    for i in range(1, n_aps + 1):
        nodes.append(
            Node(
                id=i,
                x_km=float(positions[i, 0]),
                y_km=float(positions[i, 1]),
                demand_mbps=demand_set[int(picks[i - 1])],
            )
        )

    scenario = Scenario(area_km=float(area_km), seed=int(seed), demand_set_mbps=demand_set, nodes=tuple(nodes))
    logger.debug(f"Generated scenario seed={seed} N={n_aps} L={area_km} km, demand {scenario.total_demand_mbps} Mbps")
    return scenario


def build_scenario(
    area_km: float,
    positions_km: Iterable[Tuple[float, float]],
    demands_mbps: Iterable[float],
    demand_set_mbps: Sequence[float] = DEFAULT_DEMAND_SET_MBPS,
    seed: int = 0,
) -> Scenario:
    """
    Assemble a scenario from explicit positions (PoP first) and AP demands.

    Raises ScenarioValidationError when the inputs break an invariant.
    """
    positions = list(positions_km)
    demands = [0.0] + [float(d) for d in demands_mbps]
    if len(positions) != len(demands):
        raise InvalidArgumentError(
            f"{len(positions)} positions for {len(demands) - 1} AP demands (PoP position comes first)"
        )
    payload = {
        "area_km": area_km,
        "seed": seed,
        "demand_set_mbps": list(demand_set_mbps),
        "nodes": [
            {"id": i, "x_km": x, "y_km": y, "demand_mbps": d}
            for i, ((x, y), d) in enumerate(zip(positions, demands))
        ],
    }
    return _validate(payload)


def save_scenario(scenario: Scenario) -> bytes:
    """Canonical JSON: sorted keys, 2-space indent, UTF-8, LF line endings."""
    document = scenario.model_dump(mode="json")
    text = json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def load_scenario(data: Union[bytes, str]) -> Scenario:
    """Parse and validate a scenario document."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ScenarioParseError(f"scenario is not valid UTF-8: {e}") from e
    else:
        text = data

    if not text.strip():
        raise ScenarioParseError("scenario document is empty")

    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"scenario is not valid JSON: {e}") from e

    return _validate(document)


def scenario_hash(scenario: Scenario) -> str:
    """SHA-256 of the canonical encoding"""
    return hashlib.sha256(save_scenario(scenario)).hexdigest()


def _validate(document) -> Scenario:
    if not isinstance(document, dict):
        raise ScenarioValidationError("scenario document must be a JSON object")
    try:
        return Scenario.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ()))
        raise ScenarioValidationError(f"invalid scenario ({location or 'document'}): {first['msg']}") from e
