"""Link budget: RMa path loss, SNR, rate mapping and RB requirements."""

import math

import numpy as np
import pytest

from middle_mile.errors import InvalidArgumentError
from middle_mile.radio import (
    RadioConfig,
    bs_height_for,
    link_metrics,
    link_table,
    path_loss_db,
    per_rb_rate_bps,
    rbs_required,
    snr_db,
)
from middle_mile.scenario import Node

from conftest import make_scenario


def rma_nlos_oracle(d_m, f_ghz=0.51, h_bs=30.0, h_ut=10.0, w=20.0, h=5.0):
    """TR 36.814 RMa NLoS written out term by term, natural logs converted by hand"""
    lg = lambda v: math.log(v) / math.log(10.0)  # noqa: E731
    return (
        161.04
        - 7.1 * lg(w)
        + 7.5 * lg(h)
        - (24.37 - 3.7 * (h / h_bs) ** 2) * lg(h_bs)
        + (43.42 - 3.1 * lg(h_bs)) * (lg(d_m) - 3.0)
        + 20.0 * lg(f_ghz)
        - (3.2 * lg(11.75 * h_ut) ** 2 - 4.97)
    )


@pytest.mark.parametrize("distance_m", [100.0, 500.0, 1000.0, 5000.0, 10000.0])
def test_path_loss_matches_closed_form(radio, distance_m):
    assert path_loss_db(distance_m, radio) == pytest.approx(rma_nlos_oracle(distance_m), abs=1e-9)


def test_path_loss_reference_values(radio):
    assert path_loss_db(1000.0, radio) == pytest.approx(106.61, abs=0.01)
    slope = path_loss_db(2000.0, radio) - path_loss_db(1000.0, radio)
    assert slope == pytest.approx((43.42 - 3.1 * math.log10(30.0)) * math.log10(2.0), abs=1e-9)
    assert slope == pytest.approx(11.69, abs=0.01)


@pytest.mark.parametrize("height", ["enb_height_m", "rn_height_m"])
def test_path_loss_strictly_increases_with_distance(radio, height):
    distances = np.geomspace(radio.min_distance_m, 30_000.0, 500)
    losses = np.array([path_loss_db(float(d), radio, getattr(radio, height)) for d in distances])
    assert np.all(np.diff(losses) > 0.0)


def test_path_loss_ignores_tx_power(radio):
    louder = radio.model_copy(update={"tx_power_dbm": 40.0})
    for d in [10.0, 750.0, 4000.0, 12_000.0]:
        assert path_loss_db(d, louder) == path_loss_db(d, radio)
    assert snr_db(1000.0, louder) - snr_db(1000.0, radio) == pytest.approx(13.0)


def test_noise_figure_shifts_snr_one_for_one(radio):
    noisier = radio.model_copy(update={"noise_figure_db": radio.noise_figure_db + 3.0})
    for d in [10.0, 1000.0, 6000.0]:
        assert snr_db(d, radio) - snr_db(d, noisier) == pytest.approx(3.0, abs=1e-9)


def test_path_loss_clamps_short_links(radio):
    assert path_loss_db(0.0, radio) == path_loss_db(10.0, radio)
    assert path_loss_db(3.0, radio) == path_loss_db(10.0, radio)


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_path_loss_rejects_non_finite(radio, bad):
    with pytest.raises(InvalidArgumentError):
        path_loss_db(bad, radio)


def test_relay_height_raises_loss(radio):
    assert path_loss_db(1000.0, radio, radio.rn_height_m) > path_loss_db(1000.0, radio)
    assert path_loss_db(1000.0, radio, radio.rn_height_m) == pytest.approx(
        rma_nlos_oracle(1000.0, h_bs=10.0), abs=1e-9
    )


def test_per_rb_budget(radio):
    assert radio.per_rb_tx_power_dbm == pytest.approx(7.0)
    assert radio.per_rb_noise_dbm == pytest.approx(-114.45, abs=0.01)
    assert snr_db(1000.0, radio) == pytest.approx(34.84, abs=0.01)


def test_rate_mapping(radio):
    # cap binds at high SNR
    assert per_rb_rate_bps(34.84, radio) == pytest.approx(792_000.0, abs=1e-6)
    assert per_rb_rate_bps(10.0 * math.log10(2.0), radio) == pytest.approx(
        0.75 * math.log2(3.0) * 180_000.0, rel=1e-12
    )
    assert per_rb_rate_bps(10.0 * math.log10(2.0), radio) == pytest.approx(213_970.0, abs=1.0)


def test_rate_cutoff(radio):
    assert per_rb_rate_bps(-10.0, radio) > 0.0
    assert per_rb_rate_bps(-10.001, radio) == 0.0
    assert per_rb_rate_bps(-40.0, radio) == 0.0


def test_rate_is_monotone_and_capped(radio):
    rates = np.array([per_rb_rate_bps(float(s), radio) for s in np.linspace(-30.0, 60.0, 3001)])
    assert np.all(np.diff(rates) >= 0.0)
    assert rates.min() == 0.0
    assert rates.max() <= radio.max_rate_bps
    assert radio.max_rate_bps == pytest.approx(792_000.0)


def test_rbs_required_is_tight_ceiling():
    # integer bps keep every product exact in float
    rng = np.random.default_rng(11)
    loads = rng.integers(1, 100_000_001, size=2000)
    rates = rng.integers(1, 1_000_001, size=2000)
    for load, rate in zip(loads.tolist(), rates.tolist()):
        k = rbs_required(float(load), float(rate))
        assert k * rate >= load
        assert (k - 1) * rate < load


def test_rbs_required():
    assert rbs_required(10e6, 792_000.0) == 13
    assert rbs_required(0.0, 0.0) == 0
    assert rbs_required(5e6, 0.0) is None
    assert rbs_required(792_000.0, 792_000.0) == 1
    with pytest.raises(InvalidArgumentError):
        rbs_required(-1.0, 792_000.0)


def test_link_metrics_one_km(radio):
    a = Node(id=0, x_km=0.0, y_km=0.0, demand_mbps=0.0)
    b = Node(id=1, x_km=0.6, y_km=0.8, demand_mbps=4.0)
    metrics = link_metrics(a, b, radio)
    assert metrics.distance_m == pytest.approx(1000.0)
    assert metrics.snr_db == pytest.approx(34.84, abs=0.01)
    assert metrics.per_rb_rate_bps == pytest.approx(792_000.0, abs=1e-6)
    assert metrics.capacity_bps == pytest.approx(79.2e6, abs=1e-3)
    assert metrics.usable
    assert link_metrics(b, a, radio) == metrics


def test_link_metrics_rejects_self_link(radio):
    a = Node(id=3, x_km=1.0, y_km=1.0, demand_mbps=2.0)
    with pytest.raises(InvalidArgumentError):
        link_metrics(a, a, radio)


def test_far_link_has_zero_rate(radio):
    a = Node(id=0, x_km=0.0, y_km=0.0, demand_mbps=0.0)
    b = Node(id=1, x_km=20.0, y_km=0.0, demand_mbps=2.0)
    metrics = link_metrics(a, b, radio)
    assert metrics.snr_db < radio.snr_min_db
    assert metrics.capacity_bps == 0.0
    assert not metrics.usable


def test_bs_height_rule(radio):
    assert bs_height_for(0, 4, radio) == radio.enb_height_m
    assert bs_height_for(4, 0, radio) == radio.enb_height_m
    assert bs_height_for(2, 4, radio) == radio.rn_height_m


def test_gains_shift_snr():
    base = RadioConfig()
    omni = base.model_copy(update={"tx_gain_dbi": 0.0, "rx_gain_dbi": 0.0})
    assert snr_db(1000.0, base) - snr_db(1000.0, omni) == pytest.approx(20.0)


def test_link_table_covers_ordered_pairs(radio, chain_scenario):
    table = link_table(chain_scenario, radio)
    assert len(table) == 6
    assert table[(0, 2)] == table[(2, 0)]
    assert table[(1, 2)].distance_m == pytest.approx(1000.0)


def test_relay_links_use_relay_height(radio):
    scenario = make_scenario([(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)], [2.0, 4.0])
    table = link_table(scenario, radio)
    assert table[(1, 2)].path_loss_db == pytest.approx(path_loss_db(1000.0, radio, radio.rn_height_m))
    assert table[(0, 1)].path_loss_db == pytest.approx(path_loss_db(1000.0, radio, radio.enb_height_m))
