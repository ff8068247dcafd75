"""Discrete-time (1 s) simulation of one drive under one transmission scheme.

Epoch timeline for a trace sampled at t0, t0+1, ..., t0+K:

* every epoch k > 0 adds the data produced during (k-1, k] to the buffer;
* while idle the scheme is evaluated. A periodic timer fires at the epoch
  itself; a CAT/pCAT decision taken at epoch k starts the upload at k+1;
* a positive decision moves the whole buffer into the upload (later data
  waits for the next one) and resets the time-since-last-transmission clock
  to the upload start;
* an active upload drains ``rate(SINR(k))`` bits during [k, k+1).

One uniform draw per epoch is taken from the per-drive stream whether or not
it is used, so different schemes on the same drive see the same draws.
An upload still running when the trace ends is finished at the last observed
rate; data produced after the trace ends is not modelled.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .channel_model import ChannelConfig, rate_from_sinr
from .connectivity_map import ConnectivityMap, predict_horizon_mean
from .errors import ConfigError, TraceValidationError, ValidationError
from .schemes import SchemeConfig, SchemeKind, decide
from .synthgen import derive_seed
from .traces import DriveTrace, is_uniform_grid

DECISION_LOG_HEADER = "t_s,sinr_db,probability,z,transmit"


@dataclass(frozen=True)
class DataSourceConfig:
    fill_rate_bps: float = 400e3

    def __post_init__(self):
        if not self.fill_rate_bps > 0:
            raise ValueError("fill_rate_bps must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TransmissionEvent:
    start_t: float
    end_t: float
    sinr_at_start: float
    payload_bits: int
    goodput_bps: float
    forced_by_timeout: bool
    decision_t: float

    @property
    def duration(self) -> float:
        return self.end_t - self.start_t


@dataclass
class DriveResult:
    drive_id: str
    scheme: str
    events: list[TransmissionEvent]
    residual_bits: int
    produced_bits: int
    duration_s: float
    decisions_log: list[tuple[float, float, float, float, bool]] | None = None

    def to_dict(self, include_log: bool = True) -> dict:
        d = {
            "drive_id": self.drive_id,
            "scheme": self.scheme,
            "duration_s": self.duration_s,
            "produced_bits": self.produced_bits,
            "residual_bits": self.residual_bits,
            "events": [asdict(e) for e in self.events],
        }
        if include_log and self.decisions_log is not None:
            d["decisions_log"] = [list(r) for r in self.decisions_log]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> DriveResult:
        log = d.get("decisions_log")
        return cls(
            drive_id=d["drive_id"],
            scheme=d["scheme"],
            events=[TransmissionEvent(**e) for e in d["events"]],
            residual_bits=int(d["residual_bits"]),
            produced_bits=int(d["produced_bits"]),
            duration_s=float(d["duration_s"]),
            decisions_log=None if log is None else [tuple(r) for r in log],
        )

    def decisions_csv(self) -> str:
        rows = [DECISION_LOG_HEADER]
        for t, s, p, z, tx in self.decisions_log or []:
            rows.append(f"{t!r},{s!r},{p!r},{z!r},{int(tx)}")
        return "\n".join(rows) + "\n"


@dataclass
class CampaignResult:
    results: list[DriveResult]
    metadata: dict = field(default_factory=dict)

    def schemes(self) -> list[str]:
        seen = []
        for r in self.results:
            if r.scheme not in seen:
                seen.append(r.scheme)
        return seen

    def for_scheme(self, scheme) -> list[DriveResult]:
        scheme = SchemeKind(scheme).value
        return [r for r in self.results if r.scheme == scheme]

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "results": [r.to_dict() for r in self.results]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> CampaignResult:
        return cls(results=[DriveResult.from_dict(r) for r in d["results"]], metadata=d.get("metadata", {}))


@dataclass
class _Upload:
    start_k: int
    start_t: float
    decision_t: float
    payload: int
    remaining: float
    sinr: float
    forced: bool


def _produced(fill_rate: float, k: int) -> int:
    return math.floor(fill_rate * k)


def run_drive(
    trace: DriveTrace,
    scheme,
    cfg: SchemeConfig,
    channel: ChannelConfig,
    source: DataSourceConfig,
    seed: int,
    cmap: ConnectivityMap | None = None,
    log_decisions: bool = False,
) -> DriveResult:
    kind = SchemeKind(scheme)
    if kind is SchemeKind.PCAT and cmap is None:
        raise ConfigError("pcat needs a connectivity map")
    if not is_uniform_grid(trace, 1.0):
        raise TraceValidationError(f"{trace.drive_id}: trace is not on a 1 s grid; resample it first")
    if cmap is not None and kind is SchemeKind.PCAT and cmap.route_length != trace.route_length:
        raise ValidationError(
            f"{trace.drive_id}: map route length {cmap.route_length} != trace route length {trace.route_length}"
        )

    n = len(trace)
    t0 = float(trace.t[0])
    sinr = trace.sinr
    rates = rate_from_sinr(sinr, channel)
    distance = trace.distance
    speeds = trace.speeds
    draws = np.random.default_rng(seed).random(n).tolist()
    last_query = np.nextafter(trace.route_length, 0.0)

    buffer = 0
    last_start = t0
    upload: _Upload | None = None
    events: list[TransmissionEvent] = []
    log = [] if log_decisions else None

    def close(u: _Upload, end_t: float):
        events.append(
            TransmissionEvent(
                start_t=u.start_t,
                end_t=end_t,
                sinr_at_start=u.sinr,
                payload_bits=u.payload,
                goodput_bps=u.payload / (end_t - u.start_t),
                forced_by_timeout=u.forced,
                decision_t=u.decision_t,
            )
        )

    for k in range(n):
        t = t0 + k
        if k:
            buffer += _produced(source.fill_rate_bps, k) - _produced(source.fill_rate_bps, k - 1)

        if upload is None:
            dt = t - last_start
            s = float(sinr[k])
            if kind is SchemeKind.PERIODIC:
                d = decide(kind, s, dt, cfg, draws[k])
                if log is not None:
                    log.append((t, s, d.probability, d.z_value, d.transmit))
                if d.transmit and buffer > 0:
                    upload = _Upload(k, t, t, buffer, float(buffer), s, False)
                    buffer = 0
                    last_start = t
            elif k < n - 1:
                pred = None
                if kind is SchemeKind.PCAT:
                    pred = predict_horizon_mean(cmap, min(float(distance[k]), last_query), float(speeds[k]), cfg.tau)
                d = decide(kind, s, dt, cfg, draws[k], pred)
                if log is not None:
                    log.append((t, s, d.probability, d.z_value, d.transmit))
                if d.transmit and buffer > 0:
                    upload = _Upload(k + 1, t + 1, t, buffer, float(buffer), s, dt >= cfg.t_max)
                    buffer = 0
                    last_start = t + 1

        if upload is not None and upload.start_k <= k:
            cap = float(rates[k])
            if cap >= upload.remaining:
                close(upload, t + upload.remaining / cap)
                upload = None
            else:
                upload.remaining -= cap

    if upload is not None:
        cap = float(rates[-1])
        if cap > 0:
            close(upload, t0 + n + upload.remaining / cap)
        else:
            # parked in outage: the upload never completes, its data stays unsent
            buffer += upload.payload

    produced = _produced(source.fill_rate_bps, n - 1)
    return DriveResult(
        drive_id=trace.drive_id,
        scheme=kind.value,
        events=events,
        residual_bits=buffer,
        produced_bits=produced,
        duration_s=float(n - 1),
        decisions_log=log,
    )


def drive_seed(master_seed: int, drive_id: str) -> int:
    return derive_seed(master_seed, f"rng:{drive_id}")


def _run_task(args):
    trace, scheme, cfg, channel, source, seed, cmap, log_decisions = args
    return run_drive(trace, scheme, cfg, channel, source, seed, cmap, log_decisions)


def run_campaign(
    traces: Sequence[DriveTrace],
    schemes: Sequence,
    cfg: SchemeConfig,
    channel: ChannelConfig,
    source: DataSourceConfig,
    master_seed: int,
    cmap: ConnectivityMap | None = None,
    workers: int = 1,
    log_decisions: bool = False,
    metadata: dict | None = None,
) -> CampaignResult:
    """Simulate every (scheme, drive) pair; results are ordered scheme-major.

    The RNG stream of a drive depends only on ``(master_seed, drive_id)``.
    """
    if not traces:
        raise ValueError("run_campaign needs at least one trace")
    if not schemes:
        raise ValueError("run_campaign needs at least one scheme")
    kinds = [SchemeKind(s) for s in schemes]
    if SchemeKind.PCAT in kinds and cmap is None:
        raise ConfigError("pcat needs a connectivity map")
    ids = [tr.drive_id for tr in traces]
    if len(set(ids)) != len(ids):
        raise ValidationError("drive ids must be unique within a campaign")

    tasks = [
        (tr, k, cfg, channel, source, drive_seed(master_seed, tr.drive_id), cmap, log_decisions)
        for k in kinds
        for tr in traces
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    meta = {
        "master_seed": int(master_seed),
        "schemes": [k.value for k in kinds],
        "drive_ids": ids,
        "scheme_config": cfg.to_dict(),
        "channel_config": channel.to_dict(),
        "source_config": source.to_dict(),
    }
    if metadata:
        meta.update(metadata)
    return CampaignResult(results=results, metadata=meta)
