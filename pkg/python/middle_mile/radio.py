"""
Radio link budget

3GPP rural macro (RMa) NLoS path loss, per-RB SNR, truncated Shannon
rate mapping and demand to RB conversion for the TV UHF LTE-A middle mile.

Per-RB transmit power is the total power spread evenly over the whole
band, so SNR does not depend on how many RBs a link ends up using.
Links are deterministic: no shadowing, no fading, no interference
between non-adjacent links.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .errors import InvalidArgumentError
from .scenario import POP_ID, Node, Scenario

THERMAL_NOISE_DBM_HZ = -174.0


class RadioConfig(BaseModel):
    """Link budget parameters. Defaults follow the multi-hop simulation table (500-520 MHz, 20 MHz band)."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    center_freq_ghz: float = Field(default=0.51, gt=0.0)
    tx_power_dbm: float = 27.0
    tx_gain_dbi: float = 10.0
    rx_gain_dbi: float = 10.0
    enb_height_m: float = Field(default=30.0, gt=0.0)
    rn_height_m: float = Field(default=10.0, gt=0.0)
    n_rbs: int = Field(default=100, ge=1)
    rb_bandwidth_hz: float = Field(default=180_000.0, gt=0.0)
    noise_figure_db: float = 7.0
    street_width_m: float = Field(default=20.0, gt=0.0)
    building_height_m: float = Field(default=5.0, gt=0.0)
    snr_min_db: float = -10.0
    eff_max_bps_hz: float = Field(default=4.4, gt=0.0)
    eff_scale: float = Field(default=0.75, gt=0.0, le=1.0)
    min_distance_m: float = Field(default=10.0, gt=0.0)

    @property
    def per_rb_tx_power_dbm(self) -> float:
        return self.tx_power_dbm - 10.0 * math.log10(self.n_rbs)

    @property
    def per_rb_noise_dbm(self) -> float:
        return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(self.rb_bandwidth_hz) + self.noise_figure_db

    @property
    def max_rate_bps(self) -> float:
        return self.eff_max_bps_hz * self.rb_bandwidth_hz


@dataclass(frozen=True)
class LinkMetrics:
    """Budget of one directed link. capacity_bps is the full-band C_ij."""

    distance_m: float
    path_loss_db: float
    snr_db: float
    per_rb_rate_bps: float
    capacity_bps: float

    @property
    def usable(self) -> bool:
        return self.per_rb_rate_bps > 0.0


def _check_distance(distance_m: float) -> float:
    if not math.isfinite(distance_m):
        raise InvalidArgumentError(f"distance must be finite, got {distance_m!r}")
    return distance_m


def path_loss_db(distance_m: float, cfg: RadioConfig, bs_height_m: Optional[float] = None) -> float:
    """
    RMa NLoS path loss (TR 36.814 closed form), extrapolated past its 5 km
    validity range and clamped below at cfg.min_distance_m.

    Args:
        distance_m: Link length in meters
        cfg: Radio parameters
        bs_height_m: Height of the "base station" end. Defaults to the eNB
            height; RN-RN links pass cfg.rn_height_m.
    """
    d = max(_check_distance(distance_m), cfg.min_distance_m)
    h_bs = cfg.enb_height_m if bs_height_m is None else bs_height_m
    h_ut = cfg.rn_height_m
    w = cfg.street_width_m
    h = cfg.building_height_m

    log_hbs = math.log10(h_bs)
    return (
        161.04
        - 7.1 * math.log10(w)
        + 7.5 * math.log10(h)
        - (24.37 - 3.7 * (h / h_bs) ** 2) * log_hbs
        + (43.42 - 3.1 * log_hbs) * (math.log10(d) - 3.0)
        + 20.0 * math.log10(cfg.center_freq_ghz)
        - (3.2 * math.log10(11.75 * h_ut) ** 2 - 4.97)
    )


def snr_db(distance_m: float, cfg: RadioConfig, bs_height_m: Optional[float] = None) -> float:
    """Per-RB SNR: per-RB tx power + both gains - path loss - per-RB noise"""
    return (
        cfg.per_rb_tx_power_dbm
        + cfg.tx_gain_dbi
        + cfg.rx_gain_dbi
        - path_loss_db(distance_m, cfg, bs_height_m)
        - cfg.per_rb_noise_dbm
    )


def per_rb_rate_bps(snr: float, cfg: RadioConfig) -> float:
    """Truncated Shannon: zero below the cutoff, attenuated capacity capped at eff_max."""
    if snr < cfg.snr_min_db:
        return 0.0
    efficiency = min(cfg.eff_max_bps_hz, cfg.eff_scale * math.log2(1.0 + 10.0 ** (snr / 10.0)))
    return cfg.rb_bandwidth_hz * efficiency


def rbs_required(load_bps: float, rate_bps: float) -> Optional[int]:
    """
    RBs needed to carry load_bps at rate_bps per RB.

    Returns None when the load is positive and the link carries nothing.
    """
    if load_bps < 0:
        raise InvalidArgumentError(f"load must be non-negative, got {load_bps}")
    if load_bps == 0:
        return 0
    if rate_bps <= 0:
        return None
    return math.ceil(load_bps / rate_bps)


def bs_height_for(a_id: int, b_id: int, cfg: RadioConfig) -> float:
    """eNB height for any link touching the PoP, RN height otherwise"""
    return cfg.enb_height_m if POP_ID in (a_id, b_id) else cfg.rn_height_m


def link_metrics(a: Node, b: Node, cfg: RadioConfig) -> LinkMetrics:
    """Full link budget between two sites. Symmetric in (a, b)."""
    if a.id == b.id:
        raise InvalidArgumentError(f"link endpoints must differ, got node {a.id} twice")

    distance_m = math.hypot(a.x_km - b.x_km, a.y_km - b.y_km) * 1000.0
    h_bs = bs_height_for(a.id, b.id, cfg)
    loss = path_loss_db(distance_m, cfg, h_bs)
    snr = snr_db(distance_m, cfg, h_bs)
    rate = per_rb_rate_bps(snr, cfg)
    return LinkMetrics(
        distance_m=distance_m,
        path_loss_db=loss,
        snr_db=snr,
        per_rb_rate_bps=rate,
        capacity_bps=cfg.n_rbs * rate,
    )


def link_table(scenario: Scenario, cfg: RadioConfig) -> Dict[Tuple[int, int], LinkMetrics]:
    """LinkMetrics for every ordered pair of distinct nodes"""
    table: Dict[Tuple[int, int], LinkMetrics] = {}
    nodes = scenario.nodes
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            metrics = link_metrics(a, b, cfg)
            table[(a.id, b.id)] = metrics
            table[(b.id, a.id)] = metrics
    return table
