"""Transmission decision rules: periodic, CAT and predictive CAT.

CAT sends with probability

    p = 0                                   dt <  t_min
    p = (SINR / SINR_max) ** (alpha * z)    t_min <= dt < t_max
    p = 1                                   dt >= t_max

with z = 1. pCAT scales the exponent by z, derived from the predicted change
of SINR over the next ``tau`` seconds: z > 1 (wait) when the channel is
expected to improve, z < 1 (send now) when it is expected to degrade.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum


class SchemeKind(str, Enum):
    PERIODIC = "periodic"
    CAT = "cat"
    PCAT = "pcat"


@dataclass(frozen=True)
class SchemeConfig:
    t_min: float = 30.0
    t_max: float = 120.0
    alpha: float = 6.0
    gamma: float = 2.0
    tau: float = 10.0
    sinr_max: float = 30.0
    period: float = 30.0

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        for name in ("alpha", "gamma", "tau", "sinr_max", "period"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Decision:
    transmit: bool
    probability: float
    z_value: float = 1.0
    delta_sinr: float = 0.0


def clamp_sinr(sinr: float, sinr_max: float) -> float:
    return min(max(sinr, 0.0), sinr_max)


def cat_probability(sinr: float, dt: float, z: float, cfg: SchemeConfig) -> float:
    if dt < cfg.t_min:
        return 0.0
    if dt >= cfg.t_max:
        return 1.0
    ratio = clamp_sinr(sinr, cfg.sinr_max) / cfg.sinr_max
    return ratio ** (cfg.alpha * z)


def pcat_z(sinr: float, delta_sinr: float, cfg: SchemeConfig) -> float:
    """Exponent scale for pCAT; ``sinr`` must already be clamped."""
    if delta_sinr >= 0:
        return max(delta_sinr * cfg.gamma * (1.0 - sinr / cfg.sinr_max), 1.0)
    return 1.0 / max(-delta_sinr * cfg.gamma * sinr / cfg.sinr_max, 1.0)


def pcat_probability(sinr: float, dt: float, predicted_mean: float, cfg: SchemeConfig) -> tuple[float, float, float]:
    """Return ``(probability, z, delta_sinr)``.

    The SINR change is taken on raw dB values; only the ratio is clamped.
    """
    delta = predicted_mean - sinr
    z = pcat_z(clamp_sinr(sinr, cfg.sinr_max), delta, cfg)
    return cat_probability(sinr, dt, z, cfg), z, delta


def periodic_decide(dt: float, cfg: SchemeConfig) -> Decision:
    fire = dt >= cfg.period
    return Decision(transmit=fire, probability=1.0 if fire else 0.0)


def sample_decision(probability: float, rng_draw: float) -> bool:
    if not 0.0 <= probability <= 1.0:
        raise ValueError(f"probability {probability} outside [0, 1]")
    return rng_draw < probability


def decide(
    kind: SchemeKind,
    sinr: float,
    dt: float,
    cfg: SchemeConfig,
    rng_draw: float,
    predicted_mean: float | None = None,
) -> Decision:
    """Evaluate one decision epoch for any scheme."""
    kind = SchemeKind(kind)
    if kind is SchemeKind.PERIODIC:
        return periodic_decide(dt, cfg)
    if kind is SchemeKind.CAT:
        p = cat_probability(sinr, dt, 1.0, cfg)
        return Decision(sample_decision(p, rng_draw), p)
    if predicted_mean is None:
        raise ValueError("pcat needs a predicted mean SINR")
    p, z, delta = pcat_probability(sinr, dt, predicted_mean, cfg)
    return Decision(sample_decision(p, rng_draw), p, z, delta)
