"""Shared fixtures for the planner tests."""

from typing import Optional, Sequence, Tuple

import pytest
from loguru import logger

from middle_mile.radio import RadioConfig
from middle_mile.scenario import DEFAULT_DEMAND_SET_MBPS, Scenario, build_scenario


def make_scenario(
    positions: Sequence[Tuple[float, float]],
    demands: Sequence[float],
    area_km: float = 10.0,
    demand_set: Optional[Sequence[float]] = None,
    seed: int = 0,
) -> Scenario:
    """Scenario from explicit positions (PoP first); the demand set defaults to the demands used."""
    if demand_set is None:
        used = set(demands)
        demand_set = DEFAULT_DEMAND_SET_MBPS if used <= set(DEFAULT_DEMAND_SET_MBPS) else tuple(sorted(used))
    return build_scenario(area_km, positions, demands, demand_set, seed)


@pytest.fixture
def radio() -> RadioConfig:
    return RadioConfig()


@pytest.fixture
def chain_scenario() -> Scenario:
    """eNB(0,0), A(0,1), B(0,2) with demands 2 and 4 Mbps"""
    return make_scenario([(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)], [2.0, 4.0])


@pytest.fixture(autouse=True)
def quiet_logs():
    logger.remove()
    yield
    logger.remove()
