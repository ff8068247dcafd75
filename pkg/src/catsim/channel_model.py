"""SINR to uplink rate: truncated Shannon with an efficiency factor."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

# (sinr_db, goodput_bps) pairs the default link is fitted to
CALIBRATION_ANCHORS = ((9.1, 5.1e6), (15.2, 8.2e6))
DEFAULT_EFFICIENCY = 0.75
DEFAULT_RATE_CAP = 50e6
DEFAULT_MIN_SINR = -5.0


@dataclass(frozen=True)
class ChannelConfig:
    bandwidth_hz: float
    rate_cap_bps: float = DEFAULT_RATE_CAP
    efficiency: float = DEFAULT_EFFICIENCY
    min_sinr_db: float = DEFAULT_MIN_SINR

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if not self.rate_cap_bps > 0:
            raise ValueError("rate_cap_bps must be positive")
        if not 0 < self.efficiency <= 1:
            raise ValueError("efficiency must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


def spectral_efficiency(sinr_db):
    return np.log2(1.0 + 10.0 ** (np.asarray(sinr_db, dtype=float) / 10.0))


def rate_from_sinr(sinr, cfg: ChannelConfig):
    """Achievable rate in bit/s; 0 below ``min_sinr_db``. Accepts scalars or arrays."""
    s = np.asarray(sinr, dtype=float)
    rate = np.minimum(cfg.rate_cap_bps, cfg.efficiency * cfg.bandwidth_hz * spectral_efficiency(s))
    rate = np.where(s < cfg.min_sinr_db, 0.0, rate)
    return float(rate) if rate.ndim == 0 else rate


def calibrate_defaults(
    anchors=CALIBRATION_ANCHORS,
    efficiency: float = DEFAULT_EFFICIENCY,
    rate_cap_bps: float = DEFAULT_RATE_CAP,
    min_sinr_db: float = DEFAULT_MIN_SINR,
) -> ChannelConfig:
    """Fit ``efficiency * bandwidth`` to the anchors by least squares in log-rate."""
    logs = [math.log(rate / float(spectral_efficiency(s))) for s, rate in anchors]
    scale = math.exp(sum(logs) / len(logs))
    return ChannelConfig(
        bandwidth_hz=scale / efficiency,
        rate_cap_bps=rate_cap_bps,
        efficiency=efficiency,
        min_sinr_db=min_sinr_db,
    )
