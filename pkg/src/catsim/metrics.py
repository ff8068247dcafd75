"""Evaluation outputs: SINR-at-transmission CDF, goodput per drive, gains."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import CampaignResult
from .errors import NoTransmissionsError
from .schemes import SchemeKind

log = logging.getLogger(__name__)

# Field measurements on a 9 km urban LTE route (five drives per scheme).
# Kept as context in reports; a desk-scale channel model is not expected to
# reproduce them.
REFERENCE_MEASUREMENTS = {
    "mean_sinr_at_tx_db": {"periodic": 9.1, "cat": 12.8, "pcat": 15.2},
    "mean_goodput_mbps": {"periodic": 5.1, "cat": 7.2, "pcat": 8.2},
    "goodput_gain_pct": {"cat": 42.0, "pcat": 61.0},
}


def _sinrs(result: CampaignResult, scheme) -> np.ndarray:
    vals = [e.sinr_at_start for r in result.for_scheme(scheme) for e in r.events]
    if not vals:
        raise NoTransmissionsError(f"no transmissions recorded for scheme {SchemeKind(scheme).value!r}")
    return np.array(vals)


def empirical_cdf(values) -> list[tuple[float, float]]:
    """Distinct sorted values with the fraction of samples <= each."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise NoTransmissionsError("no transmissions recorded")
    uniq, counts = np.unique(v, return_counts=True)
    frac = np.cumsum(counts) / v.size
    frac[-1] = 1.0
    return [(float(x), float(f)) for x, f in zip(uniq, frac)]


def sinr_at_tx_cdf(result: CampaignResult, scheme) -> list[tuple[float, float]]:
    return empirical_cdf(_sinrs(result, scheme))


def mean_sinr_at_tx(result: CampaignResult, scheme) -> float:
    return float(np.mean(_sinrs(result, scheme)))


@dataclass
class GoodputSummary:
    per_drive: list[tuple[str, float]]
    mean_bps: float
    # mean of per-event goodputs, per drive, then averaged; for sensitivity checks
    event_weighted_per_drive: list[tuple[str, float]]
    event_weighted_mean_bps: float
    missing_drives: list[str]


def mean_goodput_per_drive(result: CampaignResult, scheme) -> GoodputSummary:
    """Time-weighted goodput per drive (total bits / total upload time).

    The cross-drive value is the plain mean of the per-drive values.
    """
    per_drive, event_weighted, missing = [], [], []
    for r in result.for_scheme(scheme):
        if not r.events:
            log.warning("drive %s has no %s transmissions; left out of goodput", r.drive_id, r.scheme)
            missing.append(r.drive_id)
            continue
        bits = sum(e.payload_bits for e in r.events)
        secs = sum(e.end_t - e.start_t for e in r.events)
        per_drive.append((r.drive_id, bits / secs))
        event_weighted.append((r.drive_id, float(np.mean([e.goodput_bps for e in r.events]))))
    if not per_drive:
        raise NoTransmissionsError(f"no transmissions recorded for scheme {SchemeKind(scheme).value!r}")
    return GoodputSummary(
        per_drive=per_drive,
        mean_bps=float(np.mean([g for _, g in per_drive])),
        event_weighted_per_drive=event_weighted,
        event_weighted_mean_bps=float(np.mean([g for _, g in event_weighted])),
        missing_drives=missing,
    )


def gain_pct(value: float, reference: float) -> float:
    if reference == 0:
        raise ZeroDivisionError("reference goodput is zero")
    return (value - reference) / reference * 100.0


def relative_gains(result: CampaignResult) -> dict[str, float]:
    """Percent goodput gain of CAT and pCAT over the periodic scheme."""
    present = set(result.schemes())
    for k in SchemeKind:
        if k.value not in present:
            raise ValueError(f"scheme {k.value!r} missing from campaign")
    base = mean_goodput_per_drive(result, SchemeKind.PERIODIC).mean_bps
    return {
        k.value: gain_pct(mean_goodput_per_drive(result, k).mean_bps, base)
        for k in (SchemeKind.CAT, SchemeKind.PCAT)
    }


REPORT_README = """\
Report bundle columns
=====================

report.json
    per scheme: n_transmissions, n_forced (timeout-forced uploads),
    mean_sinr_at_tx_db, goodput_bps (mean over drives of the time-weighted
    per-drive goodput), goodput_event_weighted_bps, per_drive_goodput_bps,
    missing_drives. Top level: gains_pct (goodput gain of cat/pcat over
    periodic, %), reference_measurements (field values for context only),
    campaign_metadata (seeds and configs of the simulated campaign).

cdf_<scheme>.csv
    sinr_db   distinct SINR value at upload start (dB), ascending
    cum_frac  fraction of uploads with SINR <= sinr_db, ends at 1

goodput.csv
    scheme       scheme name
    drive_id     drive identifier
    goodput_bps  total payload bits / total upload seconds on that drive
"""


def build_report(result: CampaignResult) -> dict:
    schemes = {}
    for name in result.schemes():
        events = [e for r in result.for_scheme(name) for e in r.events]
        entry = {"n_transmissions": len(events), "n_forced": sum(e.forced_by_timeout for e in events)}
        if events:
            gp = mean_goodput_per_drive(result, name)
            entry.update(
                mean_sinr_at_tx_db=mean_sinr_at_tx(result, name),
                goodput_bps=gp.mean_bps,
                goodput_event_weighted_bps=gp.event_weighted_mean_bps,
                per_drive_goodput_bps=dict(gp.per_drive),
                missing_drives=gp.missing_drives,
            )
        schemes[name] = entry
    report = {"schemes": schemes}
    try:
        report["gains_pct"] = relative_gains(result)
    except (ValueError, ZeroDivisionError, NoTransmissionsError) as exc:
        log.warning("gains omitted: %s", exc)
        report["gains_pct"] = None
    report["reference_measurements"] = REFERENCE_MEASUREMENTS
    report["campaign_metadata"] = result.metadata
    return report


def summary_table(report: dict) -> str:
    gains = report.get("gains_pct") or {}
    lines = [f"{'scheme':<10}{'mean SINR@tx [dB]':>19}{'goodput [Mbps]':>16}{'gain vs periodic':>18}"]
    for name, e in report["schemes"].items():
        if "mean_sinr_at_tx_db" not in e:
            lines.append(f"{name:<10}{'-':>19}{'-':>16}{'-':>18}")
            continue
        gain = "-" if name not in gains else f"{gains[name]:+.1f} %"
        lines.append(f"{name:<10}{e['mean_sinr_at_tx_db']:>19.2f}{e['goodput_bps'] / 1e6:>16.2f}{gain:>18}")
    return "\n".join(lines)


def write_report(result: CampaignResult, out_dir: str | os.PathLike) -> dict:
    """Write report.json, cdf_<scheme>.csv, goodput.csv and README.txt."""
    out = Path(out_dir)
    report = build_report(result)
    cdfs = {}
    for name in result.schemes():
        try:
            cdfs[name] = sinr_at_tx_cdf(result, name)
        except NoTransmissionsError:
            log.warning("no transmissions for %s; CDF skipped", name)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    for name, pts in cdfs.items():
        rows = ["sinr_db,cum_frac"] + [f"{x!r},{f!r}" for x, f in pts]
        (out / f"cdf_{name}.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    rows = ["scheme,drive_id,goodput_bps"]
    for name, e in report["schemes"].items():
        for drive_id, g in (e.get("per_drive_goodput_bps") or {}).items():
            rows.append(f"{name},{drive_id},{g!r}")
    (out / "goodput.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (out / "README.txt").write_text(REPORT_README, encoding="utf-8")
    return report
