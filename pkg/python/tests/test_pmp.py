"""Point to multipoint star and shared-pool allocation."""

import numpy as np
import pytest

from middle_mile.pmp import allocate_pmp, build_pmp, evaluate_pmp, largest_remainder
from middle_mile.radio import link_metrics
from middle_mile.scenario import generate_scenario
from middle_mile.topology import Reason, TopologyKind

from conftest import make_scenario

# APs exactly 1 km from a central PoP: 792 kbps per RB
CENTER = (5.0, 5.0)
ONE_KM = [(5.0, 6.0), (6.0, 5.0), (4.0, 5.0), (5.0, 4.0)]


def test_star_shape(radio):
    scenario = generate_scenario(10, 10.0, seed=3)
    star = build_pmp(scenario, radio)
    assert star.kind is TopologyKind.PMP
    assert star.edge_count == 10
    assert all(edge.src == 0 for edge in star.edges)
    assert sorted(edge.dst for edge in star.edges) == list(range(1, 11))
    for edge in star.edges:
        assert edge.metrics == link_metrics(scenario.pop, scenario.nodes[edge.dst], radio)
    assert star.is_tree


def test_single_ap(radio):
    scenario = make_scenario([CENTER, ONE_KM[0]], [10.0])
    star = build_pmp(scenario, radio)
    assert star.edges[0].src == 0 and star.edges[0].dst == 1

    allocation = allocate_pmp(star, scenario, radio)
    assert allocation.feasible
    assert allocation.per_ap[0].required_rbs == 13
    assert allocation.per_ap[0].allocated_rbs == 13
    assert allocation.per_ap[0].served_mbps == 10.0


def test_two_aps_fit(radio):
    scenario = make_scenario([CENTER, *ONE_KM[:2]], [31.5, 31.5])
    allocation = allocate_pmp(build_pmp(scenario, radio), scenario, radio)
    assert [ap.required_rbs for ap in allocation.per_ap] == [40, 40]
    assert [ap.allocated_rbs for ap in allocation.per_ap] == [40, 40]
    assert allocation.feasible


def test_overload_largest_remainder(radio):
    scenario = make_scenario([CENTER, *ONE_KM[:3]], [39.5, 39.5, 39.5])
    allocation = allocate_pmp(build_pmp(scenario, radio), scenario, radio)
    assert allocation.total_required == 150
    assert [ap.allocated_rbs for ap in allocation.per_ap] == [34, 33, 33]
    assert allocation.total_allocated == 100
    assert not allocation.feasible
    assert allocation.per_ap[0].served_mbps == pytest.approx(34 * 0.792)
    assert allocation.per_ap[1].served_mbps == pytest.approx(33 * 0.792)


def test_largest_remainder():
    assert largest_remainder({1: 1, 2: 1, 3: 1}, 2) == {1: 1, 2: 1, 3: 0}
    assert largest_remainder({1: 10, 2: 30}, 100) == {1: 25, 2: 75}
    assert largest_remainder({4: 3, 2: 3}, 5) == {2: 3, 4: 2}
    assert largest_remainder({1: 0, 2: 0}, 7) == {1: 0, 2: 0}
    assert sum(largest_remainder({1: 7, 2: 11, 3: 13}, 100).values()) == 100


def test_zero_rate_ap(radio):
    scenario = make_scenario([(0.0, 0.0), (1.0, 0.0), (20.0, 0.0)], [2.0, 4.0], area_km=20.0)
    result = evaluate_pmp(scenario, radio)
    assert not result.feasible
    assert result.reason is Reason.ZERO_RATE
    assert result.served_per_ap_mbps == {1: 2.0, 2: 0.0}
    assert result.served_mbps == 2.0
    assert result.alpha == 0.0


def test_evaluate_feasible(radio):
    scenario = make_scenario([CENTER, *ONE_KM[:2]], [2.0, 6.0])
    result = evaluate_pmp(scenario, radio)
    assert result.feasible
    assert result.reason is Reason.OK
    assert result.alpha == 1.0
    assert result.served_mbps == result.total_demand_mbps == 8.0
    assert result.topology.edge(0, 1).rb_count == 3


def test_evaluate_overloaded(radio):
    scenario = make_scenario([CENTER, *ONE_KM[:3]], [39.5, 39.5, 39.5])
    result = evaluate_pmp(scenario, radio)
    assert result.reason is Reason.OVERLOADED
    assert result.served_mbps == pytest.approx((34 + 33 + 33) * 0.792)
    assert result.alpha == pytest.approx(33 * 0.792 / 39.5)
    assert result.served_fraction < 1.0


@pytest.mark.parametrize("seed", range(40))
def test_allocation_invariants(radio, seed):
    scenario = generate_scenario(10, 10.0, seed=seed)
    allocation = allocate_pmp(build_pmp(scenario, radio), scenario, radio)
    result = evaluate_pmp(scenario, radio)

    assert allocation.total_allocated <= radio.n_rbs
    assert result.served_mbps <= result.total_demand_mbps + 1e-9
    for ap in allocation.per_ap:
        assert ap.served_mbps <= ap.demand_mbps
    assert result.feasible == (result.served_mbps == pytest.approx(result.total_demand_mbps))


def test_raising_one_demand_can_lift_a_neighbour_by_one_rb(radio):
    # largest remainder reshuffles the leftover RBs when the total changes
    positions = [CENTER, *ONE_KM[:3]]
    before = _allocate(make_scenario(positions, [32.0, 2.0, 56.0]), radio)
    after = _allocate(make_scenario(positions, [36.0, 2.0, 56.0]), radio)

    assert [ap.required_rbs for ap in before.per_ap] == [41, 3, 71]
    assert [ap.allocated_rbs for ap in before.per_ap] == [36, 2, 62]
    assert [ap.allocated_rbs for ap in after.per_ap] == [38, 3, 59]
    assert before.per_ap[1].served_mbps == pytest.approx(1.584)
    assert after.per_ap[1].served_mbps == 2.0


@pytest.mark.parametrize("seed", range(60))
def test_raising_one_demand_lifts_others_by_at_most_one_rb(radio, seed):
    rng = np.random.default_rng(seed)
    n_aps = int(rng.integers(2, 7))
    positions = [tuple(p) for p in rng.uniform(0.0, 10.0, size=(n_aps + 1, 2)).tolist()]
    demands = rng.integers(2, 61, size=n_aps).astype(float).tolist()
    bumped_ap = int(rng.integers(0, n_aps))
    raised = list(demands)
    raised[bumped_ap] += float(rng.integers(1, 31))

    before = _allocate(make_scenario(positions, demands), radio)
    after = _allocate(make_scenario(positions, raised), radio)

    for old, new in zip(before.per_ap, after.per_ap):
        if new.node_id == bumped_ap + 1:
            continue
        assert new.allocated_rbs <= old.allocated_rbs + 1
        assert new.served_mbps <= old.served_mbps + old.rate_bps / 1e6 + 1e-9


def _allocate(scenario, radio):
    return allocate_pmp(build_pmp(scenario, radio), scenario, radio)
