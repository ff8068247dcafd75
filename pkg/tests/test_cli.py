import json
from pathlib import Path

import pytest
import yaml

from catsim.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main

SMALL = {"n_drives": 2, "map": {"n_drives": 2}}


def write_cfg(tmp_path, cfg, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


def test_generate_writes_traces_and_manifest(tmp_path):
    out = tmp_path / "tr"
    assert main(["generate", "--out", str(out), "--n-drives", "5", "--seed", "4"]) == EXIT_OK
    files = sorted(p.name for p in out.iterdir())
    assert files == [f"drive_{i:03d}.csv" for i in range(5)] + ["manifest.json"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 4 and len(manifest["drive_seeds"]) == 5

    again = tmp_path / "tr2"
    main(["generate", "--out", str(again), "--n-drives", "5", "--seed", "4"])
    for f in files:
        assert (out / f).read_bytes() == (again / f).read_bytes()


def test_generate_zero_drives_is_usage_error(tmp_path):
    assert main(["generate", "--out", str(tmp_path / "x"), "--n-drives", "0"]) == EXIT_USAGE
    assert not (tmp_path / "x").exists()


def test_build_map(tmp_path):
    main(["generate", "--out", str(tmp_path / "tr"), "--n-drives", "3", "--seed", "1"])
    traces = sorted(str(p) for p in (tmp_path / "tr").glob("*.csv"))
    out = tmp_path / "map.csv"
    assert main(["build-map", *traces, "--out", str(out), "--seed", "1"]) == EXIT_OK
    assert out.read_text().startswith("# bin_width_m=25.0 route_length_m=9000.0")
    assert main(["build-map", *traces, "--out", str(out), "--bin-width", "0"]) == EXIT_USAGE


def test_build_map_route_mismatch(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("# route_length_m=100\nt_s,distance_m,sinr_db\n0,0,1\n1,10,1\n")
    b.write_text("# route_length_m=200\nt_s,distance_m,sinr_db\n0,0,1\n1,10,1\n")
    assert main(["build-map", str(a), str(b), "--out", str(tmp_path / "m.csv")]) == EXIT_DATA
    assert not (tmp_path / "m.csv").exists()


def test_simulate_and_report(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"n_drives": 5})
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--seed", "2"]) == EXIT_OK
    camp = json.loads((out / "campaign.json").read_text())
    assert len(camp["results"]) == 15
    assert camp["metadata"]["config"]["seed"] == 2

    rep = tmp_path / "rep"
    capsys.readouterr()
    assert main(["report", str(out / "campaign.json"), "--out", str(rep)]) == EXIT_OK
    printed = capsys.readouterr().out
    for scheme in ("periodic", "cat", "pcat"):
        assert scheme in printed
    first = {p.name: p.read_bytes() for p in rep.iterdir()}
    main(["report", str(out / "campaign.json"), "--out", str(rep)])
    assert first == {p.name: p.read_bytes() for p in rep.iterdir()}


def test_simulate_flags_override_config(tmp_path):
    cfg = write_cfg(tmp_path, {**SMALL, "seed": 1, "schemes": ["periodic"]})
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--seed", "9", "--schemes", "cat"]) == EXIT_OK
    camp = json.loads((out / "campaign.json").read_text())
    assert camp["metadata"]["master_seed"] == 9
    assert {r["scheme"] for r in camp["results"]} == {"cat"}


def test_simulate_decision_logs(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--decision-logs"]) == EXIT_OK
    logs = sorted(p.name for p in (out / "decisions").iterdir())
    assert len(logs) == 6 and logs[0].endswith(".csv")


def test_simulate_from_trace_files_needs_map_for_pcat(tmp_path):
    main(["generate", "--out", str(tmp_path / "tr"), "--n-drives", "2", "--seed", "1"])
    traces = sorted(str(p) for p in (tmp_path / "tr").glob("*.csv"))
    cfg = write_cfg(tmp_path, {"traces": traces})
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()

    main(["build-map", *traces, "--out", str(tmp_path / "map.csv")])
    assert main(["simulate", "--config", cfg, "--out", str(out), "--map", str(tmp_path / "map.csv")]) == EXIT_OK
    assert len(json.loads((out / "campaign.json").read_text())["results"]) == 6


@pytest.mark.parametrize(
    "cfg",
    [
        {"profile": "urban-hotspot", "traces": ["a.csv"]},
        {"schemes": ["bogus"]},
        {"scheme_config": {"t_min": 200}},
        {"unknown_key": 1},
        {"profile": "nowhere"},
        {"map": {"file": "missing.csv"}},
    ],
)
def test_config_errors_before_output(tmp_path, cfg):
    out = tmp_path / "run"
    assert main(["simulate", "--config", write_cfg(tmp_path, cfg), "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()


def test_usage_errors(tmp_path, capsys):
    assert main(["simulate"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_malformed_campaign(tmp_path):
    bad = tmp_path / "campaign.json"
    bad.write_text("{not json")
    assert main(["report", str(bad), "--out", str(tmp_path / "rep")]) == EXIT_DATA
    bad.write_text('{"results": [{"drive_id": 1}]}')
    assert main(["report", str(bad), "--out", str(tmp_path / "rep")]) == EXIT_DATA
