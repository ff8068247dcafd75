"""Drive traces: SINR samples along a route, CSV I/O and resampling.

A trace is stored column-wise (numpy arrays) since every consumer works on
whole columns. ``DriveTrace.samples`` gives the row view when needed.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterator, NamedTuple

import numpy as np

from .errors import TraceParseError, TraceValidationError

TRACE_COLUMNS = ("t_s", "distance_m", "sinr_db")
SPEED_COLUMN = "speed_mps"


class TraceSample(NamedTuple):
    t: float
    distance: float
    sinr: float
    speed: float | None = None


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DriveTrace:
    """One drive over a route: time (s), distance from route start (m), SINR (dB).

    ``speed`` (m/s) is optional; when absent it is derived from distance
    deltas by :attr:`speeds`.
    """

    t: np.ndarray
    distance: np.ndarray
    sinr: np.ndarray
    route_length: float
    drive_id: str = "drive"
    speed: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t))
        object.__setattr__(self, "distance", _frozen(self.distance))
        object.__setattr__(self, "sinr", _frozen(self.sinr))
        if self.speed is not None:
            object.__setattr__(self, "speed", _frozen(self.speed))
        object.__setattr__(self, "route_length", float(self.route_length))
        object.__setattr__(self, "drive_id", str(self.drive_id))
        self.validate()

    def validate(self) -> None:
        n = len(self.t)
        if n == 0:
            raise TraceValidationError("no samples")
        if n < 2:
            raise TraceValidationError("a drive trace needs at least 2 samples")
        cols = [self.distance, self.sinr] + ([self.speed] if self.speed is not None else [])
        if any(c.shape != self.t.shape for c in cols):
            raise TraceValidationError("trace columns differ in length")
        for name, col in (("t", self.t), ("distance", self.distance), ("sinr", self.sinr)):
            if not np.all(np.isfinite(col)):
                raise TraceValidationError(f"non-finite value in column {name!r}")
        if self.t[0] < 0:
            raise TraceValidationError("negative time")
        if self.distance[0] < 0:
            raise TraceValidationError("negative distance")
        bad = np.flatnonzero(np.diff(self.t) <= 0)
        if bad.size:
            raise TraceValidationError(f"time not strictly increasing at sample {bad[0] + 1}")
        bad = np.flatnonzero(np.diff(self.distance) < 0)
        if bad.size:
            raise TraceValidationError(f"distance decreases at sample {bad[0] + 1}")
        if not self.route_length > 0:
            raise TraceValidationError("route_length must be positive")
        if self.distance[-1] > self.route_length:
            raise TraceValidationError(
                f"final distance {self.distance[-1]} exceeds route length {self.route_length}"
            )
        if self.speed is not None and np.any(self.speed < 0):
            raise TraceValidationError("negative speed")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def speeds(self) -> np.ndarray:
        """Speed per sample; forward difference of distance when not recorded."""
        if self.speed is not None:
            return self.speed
        v = np.empty_like(self.distance)
        v[:-1] = np.diff(self.distance) / np.diff(self.t)
        v[-1] = v[-2]
        return v

    @property
    def samples(self) -> Iterator[TraceSample]:
        speed = self.speed if self.speed is not None else [None] * len(self)
        for t, d, s, v in zip(self.t, self.distance, self.sinr, speed):
            yield TraceSample(float(t), float(d), float(s), None if v is None else float(v))

    def equals(self, other: DriveTrace) -> bool:
        if not isinstance(other, DriveTrace):
            return False
        same_speed = (self.speed is None and other.speed is None) or (
            self.speed is not None
            and other.speed is not None
            and np.array_equal(self.speed, other.speed)
        )
        return (
            self.drive_id == other.drive_id
            and self.route_length == other.route_length
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.distance, other.distance)
            and np.array_equal(self.sinr, other.sinr)
            and same_speed
        )


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"), newline=""), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def load_trace(source, route_length: float | None = None, drive_id: str | None = None) -> DriveTrace:
    """Read a trace CSV (``t_s,distance_m,sinr_db[,speed_mps]``).

    ``source`` may be a path, bytes, or a text/binary stream. Lines starting
    with ``#`` are comments; ``# route_length_m=<v>`` and ``# drive_id=<v>``
    comments are honoured. Without a stated route length the final distance
    is used.
    """
    fh, owned = _open_text(source)
    try:
        lines = fh.read().splitlines()
    finally:
        if owned:
            fh.close()

    meta = {}
    body = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            for tok in stripped.lstrip("#").split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
            continue
        if stripped:
            body.append((lineno, stripped))

    if not body:
        raise TraceValidationError("no samples (empty stream)")
    header_line, header = body[0][0], [h.strip() for h in body[0][1].split(",")]
    if tuple(header[:3]) != TRACE_COLUMNS or header[3:] not in ([], [SPEED_COLUMN]):
        raise TraceParseError(
            f"line {header_line}: expected header {','.join(TRACE_COLUMNS)}[,{SPEED_COLUMN}], got {body[0][1]!r}"
        )
    has_speed = len(header) == 4
    rows = []
    for lineno, text in body[1:]:
        parts = next(csv.reader([text]))
        if len(parts) != len(header):
            raise TraceParseError(f"line {lineno}: expected {len(header)} fields, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise TraceParseError(f"line {lineno}: {exc}") from None
        if rows and vals[0] <= rows[-1][1][0]:
            raise TraceValidationError(f"line {lineno}: time {vals[0]} not after previous sample")
        if vals[0] < 0 or vals[1] < 0:
            raise TraceValidationError(f"line {lineno}: negative time or distance")
        rows.append((lineno, vals))
    if not rows:
        raise TraceValidationError("no samples")

    data = np.array([v for _, v in rows], dtype=float)
    if route_length is None:
        route_length = float(meta["route_length_m"]) if "route_length_m" in meta else float(data[-1, 1])
    if drive_id is None:
        drive_id = meta.get("drive_id", "drive")
    return DriveTrace(
        t=data[:, 0],
        distance=data[:, 1],
        sinr=data[:, 2],
        speed=data[:, 3] if has_speed else None,
        route_length=route_length,
        drive_id=drive_id,
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def save_trace(trace: DriveTrace, sink: IO[str] | str | os.PathLike) -> None:
    """Write a trace as CSV with LF line endings; floats are written losslessly."""
    lines = [f"# drive_id={trace.drive_id} route_length_m={_fmt(trace.route_length)}"]
    header = list(TRACE_COLUMNS) + ([SPEED_COLUMN] if trace.speed is not None else [])
    lines.append(",".join(header))
    cols = [trace.t, trace.distance, trace.sinr] + ([trace.speed] if trace.speed is not None else [])
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def resample_trace(trace: DriveTrace, dt: float = 1.0) -> DriveTrace:
    """Linearly interpolate a trace onto the grid ``k * dt`` within its time span."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k0 = math.ceil(trace.t[0] / dt - 1e-9)
    k1 = math.floor(trace.t[-1] / dt + 1e-9)
    if k1 - k0 + 1 < 2:
        raise TraceValidationError("trace too short for the requested grid")
    grid = np.arange(k0, k1 + 1) * dt
    # guard the endpoints against grid rounding so np.interp never extrapolates
    grid = np.clip(grid, trace.t[0], trace.t[-1])
    speed = np.interp(grid, trace.t, trace.speed) if trace.speed is not None else None
    return DriveTrace(
        t=grid,
        distance=np.interp(grid, trace.t, trace.distance),
        sinr=np.interp(grid, trace.t, trace.sinr),
        speed=speed,
        route_length=trace.route_length,
        drive_id=trace.drive_id,
    )


def is_uniform_grid(trace: DriveTrace, dt: float = 1.0, tol: float = 1e-9) -> bool:
    return bool(np.all(np.abs(np.diff(trace.t) - dt) <= tol))
