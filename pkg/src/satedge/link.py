"""Ka-band uplink: free-space gain, SNR, Shannon rate, BPSK bit error rate,
and the reliability probabilities built on top of them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class LinkConfig:
    """Channel constants.

    ``beta_o`` is linear. ``distance_unit`` says how slant ranges (always
    carried in km by the orbit module) are expressed inside ``h = beta_o / s**2``.
    """
    beta_o: float = db_to_linear(-37.0)
    tx_power: float = 5.0                 # W
    noise_power: float = 1e-6             # W
    bandwidth: float = 20e6               # Hz
    distance_unit: str = "km"

    def __post_init__(self):
        for name in ("beta_o", "tx_power", "noise_power", "bandwidth"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.distance_unit not in ("km", "m"):
            raise ValueError("distance_unit must be 'km' or 'm'")


@dataclass(frozen=True)
class LinkMetrics:
    gain: float
    snr: float
    rate: float                           # bit/s
    ber: float


def path_gain(s: float, beta_o: float) -> float:
    if s <= 0:
        raise ValueError("distance must be positive")
    return beta_o / (s * s)


def snr(h: float, cfg: LinkConfig) -> float:
    return cfg.tx_power * h / cfg.noise_power


def shannon_rate(snr_value: float, bandwidth: float) -> float:
    return bandwidth * math.log2(1.0 + snr_value)


def bpsk_ber(snr_value: float) -> float:
    return 0.5 * math.erfc(math.sqrt(snr_value))


def metrics(slant_range_km: float, cfg: LinkConfig) -> LinkMetrics:
    s = slant_range_km * 1000.0 if cfg.distance_unit == "m" else slant_range_km
    h = path_gain(s, cfg.beta_o)
    g = snr(h, cfg)
    return LinkMetrics(h, g, shannon_rate(g, cfg.bandwidth), bpsk_ber(g))


def task_success_prob(ber: float, data_bits: float, offloaded: bool, visible: bool = True) -> float:
    """Probability every bit of an offloaded task arrives intact.

    Local tasks always succeed; an offload to a satellite outside the service
    cone always fails.
    """
    if not offloaded:
        return 1.0
    if not visible:
        return 0.0
    if ber >= 1.0:
        return 0.0
    # log domain: (1-ber)**D underflows for D ~ 1e8
    return math.exp(data_bits * math.log1p(-ber))


def period_success_prob(per_task: Iterable[float]) -> float:
    total = 1.0
    for r in per_task:
        total *= r
    return total
