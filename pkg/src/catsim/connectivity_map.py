"""Position-indexed SINR prediction built from repeated drives.

Bins of fixed width cover ``[0, route_length)``; the last bin may be shorter.
Each bin holds the arithmetic mean of every SINR sample that fell into it,
pooled across drives. Bins nobody sampled get ``n_samples == 0`` and a value
interpolated from their neighbours so lookups are total.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Sequence

import numpy as np

from .errors import MapParseError, MapValidationError, ValidationError
from .traces import DriveTrace

DEFAULT_BIN_WIDTH = 25.0
MAP_HEADER = "bin_start_m,mean_sinr_db,n_samples"


@dataclass(frozen=True, eq=False)
class ConnectivityMap:
    bin_width: float
    route_length: float
    bin_start: np.ndarray
    mean_sinr: np.ndarray
    n_samples: np.ndarray

    def __post_init__(self):
        for name, dtype in (("bin_start", float), ("mean_sinr", float), ("n_samples", np.int64)):
            a = np.array(getattr(self, name), dtype=dtype)
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        object.__setattr__(self, "bin_width", float(self.bin_width))
        object.__setattr__(self, "route_length", float(self.route_length))
        self._check()

    def _check(self):
        if not (self.bin_width > 0 and self.route_length > 0):
            raise MapValidationError("bin_width and route_length must be positive")
        n = n_bins(self.route_length, self.bin_width)
        if not (len(self.bin_start) == len(self.mean_sinr) == len(self.n_samples)):
            raise MapValidationError("map columns differ in length")
        expected = np.arange(len(self.bin_start)) * self.bin_width
        diffs = np.diff(self.bin_start)
        tol = 1e-9 * max(self.bin_width, 1.0)
        if np.any(diffs < self.bin_width - tol):
            i = int(np.flatnonzero(diffs < self.bin_width - tol)[0])
            raise MapValidationError(f"bins {i} and {i + 1} overlap")
        if np.any(diffs > self.bin_width + tol):
            i = int(np.flatnonzero(diffs > self.bin_width + tol)[0])
            raise MapValidationError(f"gap between bins {i} and {i + 1}")
        if len(self.bin_start) != n or np.any(np.abs(self.bin_start - expected) > tol * n):
            raise MapValidationError(f"bins do not cover [0, {self.route_length}) with width {self.bin_width}")
        if np.any(self.n_samples < 0):
            raise MapValidationError("negative sample count")
        if not np.all(np.isfinite(self.mean_sinr)):
            raise MapValidationError("non-finite bin mean")

    @property
    def bin_end(self) -> np.ndarray:
        return np.minimum(self.bin_start + self.bin_width, self.route_length)

    @property
    def bin_center(self) -> np.ndarray:
        return 0.5 * (self.bin_start + self.bin_end)

    def bin_index(self, distance) -> np.ndarray:
        idx = np.floor(np.asarray(distance, dtype=float) / self.bin_width).astype(np.int64)
        return np.clip(idx, 0, len(self.bin_start) - 1)

    @cached_property
    def cumulative(self) -> tuple[np.ndarray, np.ndarray]:
        """Bin edges and the running integral of SINR over distance at each edge."""
        edges = np.append(self.bin_start, self.route_length)
        integral = np.concatenate(([0.0], np.cumsum(self.mean_sinr * np.diff(edges))))
        return edges, integral

    def value_at(self, distance: float) -> float:
        return float(self.mean_sinr[self.bin_index(distance)])

    def equals(self, other: ConnectivityMap) -> bool:
        return (
            self.bin_width == other.bin_width
            and self.route_length == other.route_length
            and np.array_equal(self.bin_start, other.bin_start)
            and np.array_equal(self.mean_sinr, other.mean_sinr)
            and np.array_equal(self.n_samples, other.n_samples)
        )


def n_bins(route_length: float, bin_width: float) -> int:
    return max(1, math.ceil(route_length / bin_width - 1e-12))


def build_map(traces: Sequence[DriveTrace], bin_width: float = DEFAULT_BIN_WIDTH) -> ConnectivityMap:
    """Average SINR per distance bin over all samples of all drives."""
    if not traces:
        raise ValueError("build_map needs at least one trace")
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    route_length = traces[0].route_length
    for tr in traces[1:]:
        if tr.route_length != route_length:
            raise ValidationError(
                f"route length mismatch: {tr.drive_id} has {tr.route_length}, expected {route_length}"
            )
    n = n_bins(route_length, bin_width)
    starts = np.arange(n) * bin_width
    sums = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    for tr in traces:
        idx = np.clip(np.floor(tr.distance / bin_width).astype(np.int64), 0, n - 1)
        sums += np.bincount(idx, weights=tr.sinr, minlength=n)
        counts += np.bincount(idx, minlength=n)

    filled = counts > 0
    means = np.zeros(n)
    means[filled] = sums[filled] / counts[filled]
    if not filled.all():
        centers = 0.5 * (starts + np.minimum(starts + bin_width, route_length))
        # np.interp extends the edge values past the outermost filled bins
        means[~filled] = np.interp(centers[~filled], centers[filled], means[filled])
    return ConnectivityMap(bin_width, route_length, starts, means, counts)


def predict_horizon_mean(m: ConnectivityMap, distance: float, speed: float, tau: float) -> float:
    """Length-weighted mean map SINR over ``[distance, distance + speed * tau]``.

    The window is cut at the route end; a zero-length window returns the
    value of the bin at ``distance``.
    """
    if not 0 <= distance < m.route_length:
        raise ValueError(f"distance {distance} outside route [0, {m.route_length})")
    if speed < 0:
        raise ValueError("speed must be non-negative")
    if not tau > 0:
        raise ValueError("tau must be positive")
    end = min(distance + speed * tau, m.route_length)
    if end <= distance:
        return m.value_at(distance)
    edges, integral = m.cumulative
    a, b = np.interp([distance, end], edges, integral)
    return float((b - a) / (end - distance))


def save_map(m: ConnectivityMap, sink: IO[str] | str | os.PathLike, comment: str | None = None) -> None:
    lines = [f"# bin_width_m={m.bin_width!r} route_length_m={m.route_length!r}"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(MAP_HEADER)
    for s, v, c in zip(m.bin_start, m.mean_sinr, m.n_samples):
        lines.append(f"{float(s)!r},{float(v)!r},{int(c)}")
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def load_map(source: IO[str] | str | os.PathLike) -> ConnectivityMap:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise MapParseError("line 1: missing '# bin_width_m=<v> route_length_m=<v>' comment")
    meta = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split() if "=" in tok)
    try:
        bin_width = float(meta["bin_width_m"])
        route_length = float(meta["route_length_m"])
    except (KeyError, ValueError):
        raise MapParseError("line 1: bin_width_m / route_length_m missing or malformed") from None

    rows = []
    header_seen = False
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != MAP_HEADER:
                raise MapParseError(f"line {lineno}: expected header {MAP_HEADER!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise MapParseError(f"line {lineno}: expected 3 fields")
        try:
            rows.append((float(parts[0]), float(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise MapParseError(f"line {lineno}: {exc}") from None
    if not rows:
        raise MapParseError("map file has no bins")
    starts, means, counts = zip(*rows)
    return ConnectivityMap(bin_width, route_length, starts, means, counts)
