"""Synthetic drive traces over a fixed route.

SINR along the route is modelled as

    base_sinr + sum of Gaussian hotspot bumps
              + static shadowing   (same on every drive, seeded by ``seed``)
              + drive shadowing    (new on every drive, ``drive_noise_seed``)

Both shadowing terms are first-order autoregressive processes over distance
with exponential autocorrelation exp(-lag / corr_length).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import ValidationError
from .traces import DriveTrace

MAX_URBAN_SPEED = 14.0  # m/s, ~50 km/h


@dataclass(frozen=True)
class Hotspot:
    center: float
    amplitude: float
    width: float


@dataclass(frozen=True)
class RouteProfile:
    """Deterministic description of a route and its channel statistics.

    ``speed_profile`` is a sequence of ``(start_m, speed_mps)`` segments; the
    first must start at 0. ``stops`` are ``(distance_m, duration_s)`` halts
    (traffic lights and the like).
    """

    route_length: float
    base_sinr: float
    hotspots: tuple[Hotspot, ...] = ()
    shadowing_sigma: float = 0.0
    shadowing_corr_length: float = 50.0
    speed_profile: tuple[tuple[float, float], ...] = ((0.0, 10.0),)
    stops: tuple[tuple[float, float], ...] = ()
    static_sigma: float = 0.0
    static_corr_length: float = 100.0
    shadowing_step: float = 1.0
    max_speed: float = MAX_URBAN_SPEED

    def __post_init__(self):
        object.__setattr__(
            self,
            "hotspots",
            tuple(h if isinstance(h, Hotspot) else Hotspot(*h) for h in self.hotspots),
        )
        object.__setattr__(self, "speed_profile", tuple((float(a), float(b)) for a, b in self.speed_profile))
        object.__setattr__(self, "stops", tuple(sorted((float(a), float(b)) for a, b in self.stops)))
        self.validate()

    def validate(self) -> None:
        if not self.route_length > 0:
            raise ValidationError("route_length must be positive")
        if any(not h.width > 0 for h in self.hotspots):
            raise ValidationError("hotspot widths must be positive")
        if self.shadowing_sigma < 0 or self.static_sigma < 0:
            raise ValidationError("shadowing sigma must be non-negative")
        if not (self.shadowing_corr_length > 0 and self.static_corr_length > 0):
            raise ValidationError("correlation lengths must be positive")
        if not self.shadowing_step > 0:
            raise ValidationError("shadowing_step must be positive")
        if not self.speed_profile:
            raise ValidationError("empty speed profile")
        starts = [s for s, _ in self.speed_profile]
        if starts[0] != 0 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValidationError("speed segments must start at 0 and be strictly increasing")
        speeds = [v for _, v in self.speed_profile]
        if all(v == 0 for v in speeds):
            raise ValidationError("vehicle never moves")
        if any(v < 0 or v > self.max_speed for v in speeds):
            raise ValidationError(f"speeds must lie in [0, {self.max_speed}] m/s")
        for d, dur in self.stops:
            if not 0 < d < self.route_length or dur < 0 or dur != int(dur):
                raise ValidationError(f"invalid stop ({d}, {dur})")

    def speed_at(self, distance: float) -> float:
        v = self.speed_profile[0][1]
        for start, speed in self.speed_profile:
            if start <= distance:
                v = speed
            else:
                break
        return v

    def deterministic_sinr(self, distance) -> np.ndarray:
        """Noise-free part of the field: base level plus hotspot bumps."""
        d = np.asarray(distance, dtype=float)
        out = np.full(d.shape, float(self.base_sinr))
        for h in self.hotspots:
            out = out + h.amplitude * np.exp(-((d - h.center) ** 2) / (2.0 * h.width**2))
        return out


def derive_seed(master_seed: int, key) -> int:
    """Stable 64-bit sub-seed: first 8 bytes of blake2b("<master>:<key>")."""
    digest = hashlib.blake2b(f"{int(master_seed)}:{key}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def ar1_shadowing(n: int, step: float, sigma: float, corr_length: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) samples on a grid with spacing ``step``.

    Lag-k correlation is exp(-k * step / corr_length); marginal std is ``sigma``.
    """
    if sigma == 0:
        return np.zeros(n)
    rho = math.exp(-step / corr_length)
    e = rng.standard_normal(n)
    e[1:] *= math.sqrt(1.0 - rho * rho)
    return sigma * lfilter([1.0], [1.0, -rho], e)


def _shadowing_at(distance, profile: RouteProfile, sigma, corr_length, seed) -> np.ndarray:
    if sigma == 0:
        return np.zeros(len(distance))
    n = int(math.ceil(profile.route_length / profile.shadowing_step)) + 1
    grid = np.arange(n) * profile.shadowing_step
    field_ = ar1_shadowing(n, profile.shadowing_step, sigma, corr_length, np.random.default_rng(seed))
    return np.interp(distance, grid, field_)


def drive_positions(profile: RouteProfile) -> np.ndarray:
    """Distance at each 1 s tick until the route end is reached."""
    pos = 0.0
    out = [pos]
    stops = list(profile.stops)
    while pos < profile.route_length:
        v = profile.speed_at(pos)
        if v <= 0:
            raise ValidationError(f"vehicle stalls at {pos:.1f} m (zero speed segment)")
        nxt = pos + v
        if stops and pos < stops[0][0] <= nxt:
            d, dur = stops.pop(0)
            out.append(d)
            out.extend([d] * int(dur))
            pos = d
            continue
        pos = min(nxt, profile.route_length)
        out.append(pos)
    return np.array(out)


def generate_trace(profile: RouteProfile, seed: int, drive_noise_seed: int, drive_id: str = "drive") -> DriveTrace:
    """One synthetic drive sampled at 1 Hz; a pure function of its arguments."""
    distance = drive_positions(profile)
    t = np.arange(len(distance), dtype=float)
    sinr = (
        profile.deterministic_sinr(distance)
        + _shadowing_at(distance, profile, profile.static_sigma, profile.static_corr_length, seed)
        + _shadowing_at(distance, profile, profile.shadowing_sigma, profile.shadowing_corr_length, drive_noise_seed)
    )
    speed = np.empty_like(distance)
    speed[:-1] = np.diff(distance)
    speed[-1] = speed[-2]
    return DriveTrace(
        t=t, distance=distance, sinr=sinr, speed=speed, route_length=profile.route_length, drive_id=drive_id
    )


def generate_ensemble(profile: RouteProfile, n_drives: int, master_seed: int, first: int = 0) -> list[DriveTrace]:
    """``n_drives`` repeated drives sharing the route field.

    Static shadowing uses ``derive_seed(master_seed, "route")``; drive ``i``
    uses ``derive_seed(master_seed, i)`` for its own shadowing. ``first``
    offsets the drive index, so ``first=n`` yields further drives of the same
    route that do not overlap with the first ``n``.
    """
    if n_drives < 1:
        raise ValueError("n_drives must be at least 1")
    route_seed = derive_seed(master_seed, "route")
    return [
        generate_trace(profile, route_seed, derive_seed(master_seed, i), drive_id=f"drive_{i:03d}")
        for i in range(first, first + n_drives)
    ]


def urban_hotspot_profile() -> RouteProfile:
    """Bundled 9 km urban route with a handful of connectivity hotspots."""
    return RouteProfile(
        route_length=9000.0,
        base_sinr=5.0,
        hotspots=(
            Hotspot(600.0, 14.0, 90.0),
            Hotspot(1700.0, 11.0, 120.0),
            Hotspot(2600.0, 16.0, 70.0),
            Hotspot(3500.0, 10.0, 150.0),
            Hotspot(4300.0, 13.0, 80.0),
            Hotspot(5200.0, 15.0, 100.0),
            Hotspot(6100.0, 9.0, 130.0),
            Hotspot(7000.0, 14.0, 90.0),
            Hotspot(7900.0, 12.0, 110.0),
            Hotspot(8600.0, -6.0, 200.0),
            Hotspot(2150.0, -7.0, 150.0),
        ),
        shadowing_sigma=1.5,
        shadowing_corr_length=40.0,
        static_sigma=3.0,
        static_corr_length=120.0,
        speed_profile=(
            (0.0, 9.0),
            (1200.0, 12.5),
            (2400.0, 8.0),
            (3300.0, 13.5),
            (4800.0, 10.0),
            (6500.0, 11.5),
            (8000.0, 7.0),
        ),
        stops=((1163.0, 25), (2941.0, 40), (4757.0, 30), (6438.0, 20), (8212.0, 35)),
    )


BUNDLED_PROFILES = {"urban-hotspot": urban_hotspot_profile}


def profile_from_dict(d: dict) -> RouteProfile:
    d = dict(d)
    if "hotspots" in d:
        d["hotspots"] = tuple(
            Hotspot(**h) if isinstance(h, dict) else Hotspot(*h) for h in d["hotspots"]
        )
    for key in ("speed_profile", "stops"):
        if key in d:
            d[key] = tuple(tuple(x) for x in d[key])
    try:
        return RouteProfile(**d)
    except TypeError as exc:
        raise ValidationError(f"bad route profile: {exc}") from None


def profile_to_dict(p: RouteProfile) -> dict:
    return {
        "route_length": p.route_length,
        "base_sinr": p.base_sinr,
        "hotspots": [{"center": h.center, "amplitude": h.amplitude, "width": h.width} for h in p.hotspots],
        "shadowing_sigma": p.shadowing_sigma,
        "shadowing_corr_length": p.shadowing_corr_length,
        "speed_profile": [list(s) for s in p.speed_profile],
        "stops": [list(s) for s in p.stops],
        "static_sigma": p.static_sigma,
        "static_corr_length": p.static_corr_length,
        "shadowing_step": p.shadowing_step,
        "max_speed": p.max_speed,
    }
