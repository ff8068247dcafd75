"""Command line front end: ``catsim generate | build-map | simulate | report``.

Configuration is a YAML file; command-line flags override it. Keys::

    seed: 1                      # master seed
    profile: urban-hotspot       # bundled profile name or a mapping of RouteProfile fields
    traces: [a.csv, b.csv]       # alternative to ``profile``; never both
    n_drives: 5
    schemes: [periodic, cat, pcat]
    scheme_config: {t_min: 30, t_max: 120, alpha: 6, gamma: 2, tau: 10, sinr_max: 30, period: 30}
    channel: {}                  # overrides of the calibrated ChannelConfig
    source: {fill_rate_bps: 400000}
    map: {bin_width: 25, file: null, n_drives: 5}
    workers: 1
    decision_logs: false

Exit codes: 0 ok, 1 usage/config error, 2 data/validation error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .channel_model import ChannelConfig, calibrate_defaults
from .connectivity_map import DEFAULT_BIN_WIDTH, ConnectivityMap, build_map, load_map, save_map
from .engine import CampaignResult, DataSourceConfig, run_campaign
from .errors import ConfigError, ParseError, ValidationError
from .metrics import summary_table, write_report
from .schemes import SchemeConfig, SchemeKind
from .synthgen import (
    BUNDLED_PROFILES,
    RouteProfile,
    derive_seed,
    generate_ensemble,
    profile_from_dict,
    profile_to_dict,
)
from .traces import DriveTrace, is_uniform_grid, load_trace, resample_trace, save_trace

log = logging.getLogger("catsim")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DEFAULTS = {
    "seed": 0,
    "n_drives": 5,
    "schemes": ["periodic", "cat", "pcat"],
    "scheme_config": {},
    "channel": {},
    "source": {},
    "map": {"bin_width": DEFAULT_BIN_WIDTH, "file": None, "n_drives": 5},
    "workers": 1,
    "decision_logs": False,
}
KNOWN_KEYS = set(DEFAULTS) | {"profile", "traces"}


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    seed: int
    profile: RouteProfile | None
    profile_spec: object
    trace_files: list[Path]
    n_drives: int
    schemes: list[SchemeKind]
    scheme_config: SchemeConfig
    channel: ChannelConfig
    source: DataSourceConfig
    bin_width: float
    map_file: Path | None
    map_drives: int
    workers: int
    decision_logs: bool
    raw: dict = field(default_factory=dict)

    def provenance(self) -> dict:
        """Everything that determines the campaign output (not worker count)."""
        return {
            "seed": self.seed,
            "profile": profile_to_dict(self.profile) if self.profile else None,
            "profile_name": self.profile_spec if isinstance(self.profile_spec, str) else None,
            "traces": [str(p) for p in self.trace_files],
            "n_drives": self.n_drives,
            "schemes": [s.value for s in self.schemes],
            "scheme_config": self.scheme_config.to_dict(),
            "channel": self.channel.to_dict(),
            "source": self.source.to_dict(),
            "map": {
                "bin_width": self.bin_width,
                "file": str(self.map_file) if self.map_file else None,
                "n_drives": self.map_drives,
            },
        }


def read_config_file(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    unknown = set(data) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"{p}: unknown keys {sorted(unknown)}")
    return data


def _merge(file_cfg: dict, overrides: dict) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))
    for src in (file_cfg, overrides):
        for k, v in src.items():
            if v is None:
                continue
            if isinstance(v, dict) and isinstance(cfg.get(k), dict):
                cfg[k].update(v)
            else:
                cfg[k] = v
    return cfg


def _resolve_profile(spec) -> RouteProfile:
    if isinstance(spec, str):
        if spec not in BUNDLED_PROFILES:
            raise ConfigError(f"unknown profile {spec!r}; bundled: {sorted(BUNDLED_PROFILES)}")
        return BUNDLED_PROFILES[spec]()
    if isinstance(spec, dict):
        try:
            return profile_from_dict(spec)
        except ValidationError as exc:
            raise ConfigError(f"invalid profile: {exc}") from None
    raise ConfigError("profile must be a bundled name or a mapping")


def _build(cls, values: dict, what: str):
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {what}: {exc}") from None


def resolve_config(file_cfg: dict, overrides: dict | None = None, need_source: bool = True) -> RunConfig:
    """Merge, validate and type the configuration. Raises ConfigError."""
    overrides = overrides or {}
    traces_given = bool(file_cfg.get("traces") or overrides.get("traces"))
    profile_given = file_cfg.get("profile") is not None or overrides.get("profile") is not None
    if traces_given and profile_given:
        raise ConfigError("give either 'profile' or 'traces', not both")
    raw = _merge(file_cfg, overrides)

    profile = None
    profile_spec = None
    trace_files: list[Path] = []
    if traces_given:
        trace_files = [Path(p) for p in raw["traces"]]
        missing = [str(p) for p in trace_files if not p.is_file()]
        if missing:
            raise ConfigError(f"trace files not found: {missing}")
    elif need_source:
        profile_spec = raw.get("profile", "urban-hotspot")
        profile = _resolve_profile(profile_spec)

    try:
        seed = int(raw["seed"])
        n_drives = int(raw["n_drives"])
        workers = int(raw["workers"])
        map_drives = int(raw["map"].get("n_drives", 5))
        bin_width = float(raw["map"].get("bin_width", DEFAULT_BIN_WIDTH))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid numeric setting: {exc}") from None
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    if n_drives < 1:
        raise ConfigError("n_drives must be at least 1")
    if map_drives < 1:
        raise ConfigError("map.n_drives must be at least 1")
    if not bin_width > 0:
        raise ConfigError("map.bin_width must be positive")
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    try:
        schemes = [SchemeKind(s) for s in raw["schemes"]]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not schemes:
        raise ConfigError("no schemes selected")

    channel = calibrate_defaults()
    if raw["channel"]:
        channel = _build(ChannelConfig, {**channel.to_dict(), **raw["channel"]}, "channel config")
    map_file = raw["map"].get("file")
    map_file = Path(map_file) if map_file else None
    if map_file is not None and not map_file.is_file():
        raise ConfigError(f"map file not found: {map_file}")
    if SchemeKind.PCAT in schemes and trace_files and map_file is None:
        raise ConfigError("pcat selected without a map: set map.file (see 'catsim build-map')")

    return RunConfig(
        seed=seed,
        profile=profile,
        profile_spec=profile_spec,
        trace_files=trace_files,
        n_drives=n_drives,
        schemes=schemes,
        scheme_config=_build(SchemeConfig, raw["scheme_config"], "scheme config"),
        channel=channel,
        source=_build(DataSourceConfig, raw["source"], "source config"),
        bin_width=bin_width,
        map_file=map_file,
        map_drives=map_drives,
        workers=workers,
        decision_logs=bool(raw["decision_logs"]),
        raw=raw,
    )


def _prepare_out_dir(path) -> Path:
    out = Path(path)
    if out.exists() and not out.is_dir():
        raise ConfigError(f"output path is not a directory: {out}")
    return out


def _load_traces(files) -> list[DriveTrace]:
    traces = []
    for i, f in enumerate(files):
        tr = load_trace(f)
        if tr.drive_id == "drive":
            tr = DriveTrace(tr.t, tr.distance, tr.sinr, tr.route_length, Path(f).stem, tr.speed)
        if not is_uniform_grid(tr, 1.0) or tr.t[0] != round(tr.t[0]):
            tr = resample_trace(tr, 1.0)
        traces.append(tr)
    return traces


def cmd_generate(args) -> int:
    overrides = {"seed": args.seed, "n_drives": args.n_drives, "profile": args.profile}
    cfg = resolve_config(read_config_file(args.config), overrides)
    if cfg.profile is None:
        raise ConfigError("generate needs a route profile, not trace files")
    traces = generate_ensemble(cfg.profile, cfg.n_drives, cfg.seed, first=args.first)
    out = _prepare_out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for tr in traces:
        name = f"{tr.drive_id}.csv"
        save_trace(tr, out / name)
        files.append(name)
    manifest = {
        "generator": f"catsim {__version__}",
        "master_seed": cfg.seed,
        "route_seed": derive_seed(cfg.seed, "route"),
        "drive_seeds": {tr.drive_id: derive_seed(cfg.seed, args.first + i) for i, tr in enumerate(traces)},
        "profile_name": cfg.profile_spec if isinstance(cfg.profile_spec, str) else None,
        "profile": profile_to_dict(cfg.profile),
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(files)} traces to {out}")
    return EXIT_OK


def cmd_build_map(args) -> int:
    file_cfg = read_config_file(args.config)
    overrides = {"seed": args.seed}
    if args.bin_width is not None:
        overrides["map"] = {"bin_width": args.bin_width}
    cfg = resolve_config(file_cfg, overrides, need_source=False)
    files = [Path(f) for f in (args.traces or file_cfg.get("traces") or [])]
    if not files:
        raise UsageError("build-map needs trace files")
    missing = [str(f) for f in files if not f.is_file()]
    if missing:
        raise ConfigError(f"trace files not found: {missing}")
    traces = _load_traces(files)
    m = build_map(traces, cfg.bin_width)
    out = Path(args.out)
    if out.is_dir():
        out = out / "map.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_map(m, out, comment=f"built from {len(traces)} drives: {' '.join(t.drive_id for t in traces)}")
    print(f"wrote map with {len(m.bin_start)} bins to {out}")
    return EXIT_OK


def simulate(cfg: RunConfig) -> tuple[CampaignResult, ConnectivityMap | None]:
    """Run a campaign from a resolved config (no file output)."""
    map_source = None
    if cfg.trace_files:
        traces = _load_traces(cfg.trace_files)
    else:
        traces = generate_ensemble(cfg.profile, cfg.n_drives, cfg.seed)
        map_source = {"kind": "synthetic", "master_seed": cfg.seed, "first_drive": cfg.n_drives,
                      "n_drives": cfg.map_drives}

    cmap = None
    needs_map = SchemeKind.PCAT in cfg.schemes
    if cfg.map_file is not None:
        cmap = load_map(cfg.map_file)
        map_source = {"kind": "file", "path": str(cfg.map_file)}
    elif needs_map:
        # separate drives over the same route, disjoint from the evaluated ones
        cmap = build_map(generate_ensemble(cfg.profile, cfg.map_drives, cfg.seed, first=cfg.n_drives), cfg.bin_width)
    if cmap is not None and any(t.route_length != cmap.route_length for t in traces):
        raise ValidationError("map route length does not match the traces")

    result = run_campaign(
        traces,
        cfg.schemes,
        cfg.scheme_config,
        cfg.channel,
        cfg.source,
        cfg.seed,
        cmap=cmap,
        workers=cfg.workers,
        log_decisions=cfg.decision_logs,
        metadata={"config": cfg.provenance(), "map_source": map_source if needs_map else None,
                  "generator": f"catsim {__version__}"},
    )
    return result, cmap


def cmd_simulate(args) -> int:
    overrides = {"seed": args.seed, "workers": args.workers, "n_drives": args.n_drives}
    if args.decision_logs:
        overrides["decision_logs"] = True
    if args.schemes:
        overrides["schemes"] = args.schemes.split(",")
    if args.map is not None:
        overrides["map"] = {"file": args.map}
    cfg = resolve_config(read_config_file(args.config), overrides)
    out = _prepare_out_dir(args.out)
    result, cmap = simulate(cfg)

    out.mkdir(parents=True, exist_ok=True)
    (out / "campaign.json").write_text(result.to_json(), encoding="utf-8")
    if cmap is not None and cfg.map_file is None:
        save_map(cmap, out / "map.csv", comment=f"seed={cfg.seed}")
    if cfg.decision_logs:
        logdir = out / "decisions"
        logdir.mkdir(exist_ok=True)
        for r in result.results:
            (logdir / f"{r.scheme}_{r.drive_id}.csv").write_text(r.decisions_csv(), encoding="utf-8")
    print(f"simulated {len(result.results)} drive runs -> {out / 'campaign.json'}")
    return EXIT_OK


def load_campaign(path) -> CampaignResult:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"campaign file not found: {p}")
    try:
        return CampaignResult.from_dict(json.loads(p.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{p}: malformed campaign file ({exc})") from None


def cmd_report(args) -> int:
    read_config_file(args.config)
    result = load_campaign(args.campaign)
    out = _prepare_out_dir(args.out)
    report = write_report(result, out)
    print(summary_table(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="catsim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"catsim {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_help):
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", required=True, help=out_help)

    p = sub.add_parser("generate", help="write synthetic drive traces and a manifest")
    common(p, "output directory")
    p.add_argument("--n-drives", type=int)
    p.add_argument("--first", type=int, default=0, help="index of the first drive")
    p.add_argument("--profile", help="bundled profile name")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build-map", help="build a connectivity map from trace files")
    common(p, "map file (or directory for map.csv)")
    p.add_argument("traces", nargs="*")
    p.add_argument("--bin-width", type=float)
    p.set_defaults(func=cmd_build_map)

    p = sub.add_parser("simulate", help="run all schemes over a drive ensemble")
    common(p, "output directory for campaign.json")
    p.add_argument("--workers", type=int)
    p.add_argument("--n-drives", type=int)
    p.add_argument("--schemes", help="comma separated, e.g. periodic,cat,pcat")
    p.add_argument("--map", help="existing map file for pcat")
    p.add_argument("--decision-logs", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="compute metrics from campaign.json")
    common(p, "output directory for the report bundle")
    p.add_argument("campaign")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        if getattr(args, "n_drives", None) is not None and args.n_drives < 1:
            raise UsageError("--n-drives must be at least 1")
        if getattr(args, "bin_width", None) is not None and not args.bin_width > 0:
            raise UsageError("--bin-width must be positive")
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"catsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ParseError) as exc:
        print(f"catsim: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"catsim: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
