import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catsim.channel_model import ChannelConfig, calibrate_defaults
from catsim.connectivity_map import ConnectivityMap, build_map
from catsim.engine import CampaignResult, DataSourceConfig, run_campaign, run_drive
from catsim.errors import ConfigError, TraceValidationError
from catsim.schemes import SchemeConfig
from catsim.synthgen import generate_ensemble, urban_hotspot_profile
from catsim.traces import DriveTrace

from conftest import flat_trace

CFG = SchemeConfig()
UNIT_LINK = ChannelConfig(bandwidth_hz=1e6, efficiency=1.0, rate_cap_bps=1e9, min_sinr_db=-5.0)


def starts(res):
    return [e.start_t for e in res.events]


def test_periodic_every_period(channel):
    tr = flat_trace(301, 10.0)  # t = 0 .. 300
    res = run_drive(tr, "periodic", CFG, channel, DataSourceConfig(), seed=1)
    assert starts(res) == [30.0 * k for k in range(1, 11)]


def test_cat_at_sinr_max_sends_first_eligible_epoch(channel):
    tr = flat_trace(1000, 30.0)
    res = run_drive(tr, "cat", CFG, channel, DataSourceConfig(), seed=5)
    s = starts(res)
    assert s[0] == 31.0  # decided at dt = 30, upload begins one tick later
    assert set(np.diff(s)) == {31.0}


def test_cat_at_zero_sinr_waits_for_timeout(channel):
    tr = flat_trace(1000, -2.0)
    res = run_drive(tr, "cat", CFG, channel, DataSourceConfig(), seed=5)
    assert set(np.diff(starts(res))) == {121.0}
    assert all(e.forced_by_timeout for e in res.events)


def test_single_upload_hand_computed():
    # 100 kbit/s for 30 s = 3 Mbit; 1 Mbit/s at 0 dB -> 3 s
    tr = flat_trace(40, 0.0)
    res = run_drive(tr, "periodic", CFG, UNIT_LINK, DataSourceConfig(100e3), seed=0)
    ev = res.events[0]
    assert (ev.start_t, ev.payload_bits) == (30.0, 3_000_000)
    assert ev.end_t == pytest.approx(33.0)
    assert ev.goodput_bps == pytest.approx(1e6)


def test_rate_integrated_per_epoch():
    # 0 dB at t=30,31, outage at 32,33, 0 dB again: 3 Mbit done at t=35
    sinr = np.zeros(45)
    sinr[32:34] = -10.0
    tr = DriveTrace(np.arange(45.0), np.arange(45.0), sinr, route_length=50)
    res = run_drive(tr, "periodic", CFG, UNIT_LINK, DataSourceConfig(100e3), seed=0)
    ev = res.events[0]
    assert ev.end_t == pytest.approx(35.0)
    assert ev.goodput_bps == pytest.approx(3e6 / 5)


def test_upload_running_at_trace_end_finishes_at_last_rate():
    tr = flat_trace(31, 0.0)  # periodic fires at the final sample t = 30
    res = run_drive(tr, "periodic", CFG, UNIT_LINK, DataSourceConfig(100e3), seed=0)
    assert res.events[0].end_t == pytest.approx(33.0)
    assert res.residual_bits == 0


def test_upload_stuck_in_outage_returns_to_residual():
    tr = flat_trace(31, -20.0)
    res = run_drive(tr, "periodic", CFG, UNIT_LINK, DataSourceConfig(100e3), seed=0)
    assert res.events == []
    assert res.residual_bits == res.produced_bits == 3_000_000


def test_pcat_needs_map(channel):
    with pytest.raises(ConfigError):
        run_drive(flat_trace(100, 10), "pcat", CFG, channel, DataSourceConfig(), seed=0)
    with pytest.raises(ConfigError):
        run_campaign([flat_trace(100, 10)], ["cat", "pcat"], CFG, channel, DataSourceConfig(), 0)


def test_requires_unit_grid(channel):
    tr = DriveTrace([0, 2, 4], [0, 1, 2], [1, 1, 1], route_length=5)
    with pytest.raises(TraceValidationError):
        run_drive(tr, "cat", CFG, channel, DataSourceConfig(), seed=0)


def _check_drive(res, trace, fill, cfg=CFG):
    assert sum(e.payload_bits for e in res.events) + res.residual_bits == res.produced_bits
    assert res.produced_bits == int(np.floor(fill * (len(trace) - 1)))
    s = starts(res)
    gaps = np.diff(s)
    if res.scheme == "periodic":
        # exactly the period unless the previous upload overran it
        for e, gap in zip(res.events, gaps):
            assert gap == max(cfg.period, np.ceil(e.end_t - e.start_t))
    else:
        assert np.all(gaps > cfg.t_min) and np.all(gaps <= cfg.t_max + 1)
    sinr_at = dict(zip(trace.t, trace.sinr))
    for e in res.events:
        assert e.end_t > e.start_t and e.payload_bits > 0
        assert e.goodput_bps == pytest.approx(e.payload_bits / (e.end_t - e.start_t))
        assert e.sinr_at_start == sinr_at[e.decision_t]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32), st.floats(1e3, 2e6), st.sampled_from(["periodic", "cat", "pcat"]))
def test_conservation_and_gap_bounds(seed, fill, scheme):
    prof = urban_hotspot_profile()
    tr = generate_ensemble(prof, 1, seed)[0]
    m = build_map(generate_ensemble(prof, 2, seed, first=1))
    res = run_drive(tr, scheme, CFG, calibrate_defaults(), DataSourceConfig(fill), seed, cmap=m)
    _check_drive(res, tr, fill)


def test_decision_log_is_side_effect_free(channel):
    prof = urban_hotspot_profile()
    tr = generate_ensemble(prof, 1, 3)[0]
    m = build_map([tr])
    a = run_drive(tr, "pcat", CFG, channel, DataSourceConfig(), 9, cmap=m, log_decisions=True)
    b = run_drive(tr, "pcat", CFG, channel, DataSourceConfig(), 9, cmap=m, log_decisions=False)
    assert a.decisions_log and b.decisions_log is None
    assert a.to_dict(include_log=False) == b.to_dict()
    csv = a.decisions_csv().splitlines()
    assert csv[0] == "t_s,sinr_db,probability,z,transmit" and len(csv) == len(a.decisions_log) + 1


def test_campaign_cardinality_and_determinism(channel):
    prof = urban_hotspot_profile()
    ens = generate_ensemble(prof, 5, 1)
    m = build_map(generate_ensemble(prof, 5, 1, first=5))
    args = (ens, ["periodic", "cat", "pcat"], CFG, channel, DataSourceConfig(), 77)
    a = run_campaign(*args, cmap=m)
    assert len(a.results) == 15
    assert a.to_json() == run_campaign(*args, cmap=m).to_json()
    assert a.to_json() == run_campaign(*args, cmap=m, workers=3).to_json()
    back = CampaignResult.from_dict(json.loads(a.to_json()))
    assert back.to_json() == a.to_json()


def test_schemes_share_rng_stream(channel):
    # CAT and pCAT with a prediction equal to the channel make identical choices
    ens = generate_ensemble(dataclasses.replace(urban_hotspot_profile(), hotspots=(), shadowing_sigma=0.0,
                                                static_sigma=0.0, base_sinr=21.0), 3, 4)
    m = build_map(ens)
    res = run_campaign(ens, ["cat", "pcat"], CFG, channel, DataSourceConfig(), 4, cmap=m)
    for c, p in zip(res.for_scheme("cat"), res.for_scheme("pcat")):
        assert c.events == p.events and len(c.events) > 3


def test_duplicate_drive_ids_rejected(channel):
    tr = flat_trace(100, 10)
    with pytest.raises(ValueError):
        run_campaign([tr, tr], ["cat"], CFG, channel, DataSourceConfig(), 0)


def test_map_route_mismatch(channel):
    m = ConnectivityMap(100.0, 200.0, [0.0, 100.0], [0.0, 20.0], [1, 1])
    with pytest.raises(ValueError):
        run_drive(flat_trace(100, 10, route_length=990.0), "pcat", CFG, channel, DataSourceConfig(), 0, cmap=m)
