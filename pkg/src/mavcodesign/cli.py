"""Command-line front end.

Exit codes: 0 success, 1 usage error (bad flags, unknown names), 2 domain error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import cig as cigmod
from .catalog import CatalogError, load_catalog, validate_platform, default_catalog
from .dse import AXES, Constraints, DesignGrid, Metric, gradient_field, samples_to_csv, slice_samples, sweep
from .dynamics import AffineHoverPower, Battery, CannotHoverError, ParametricPower, max_acceleration, total_mass
from .pipeline import PipelineTiming, v_max_bound
from .sim import MissionSpec, simulate
from .study import knob_checks, load_scenario, offload_checks, parse_knob, parse_offload, platform_table, run_scenario

log = logging.getLogger("mavcodesign")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class CliConfig:
    catalog: str | None = None
    out_dir: Path | None = None
    fmt: str | None = None  # csv | json; None = human-readable table
    dt: float | None = None
    verbosity: int = 0

    def __post_init__(self):
        if self.fmt not in (None, "csv", "json"):
            raise UsageError(f"output format must be csv or json, got {self.fmt!r}")


def _emit(cfg: CliConfig, name: str, text: str):
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / name).write_text(text, encoding="utf-8")
        log.info("wrote %s", cfg.out_dir / name)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _table(header, rows, fmt) -> str:
    cells = [[f.format(v) if isinstance(v, float) else str(v) for f, v in zip(fmt, row)] for row in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h) for i, h in enumerate(header)]
    out = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    out += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(out) + "\n"


def _render(cfg, name, header, rows, fmt):
    if cfg.fmt == "csv":
        _emit(cfg, name + ".csv", _csv(header, rows))
    elif cfg.fmt == "json":
        _emit(cfg, name + ".json", _json([dict(zip(header, r)) for r in rows]))
    else:
        _emit(cfg, name + ".txt", _table(header, rows, fmt))


def _catalog(cfg):
    return load_catalog(cfg.catalog) if cfg.catalog else default_catalog()


def _lookup(fn, name):
    try:
        return fn(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc


def _power_model(name: str):
    return ParametricPower() if name == "parametric" else AffineHoverPower.from_anchors()


def cmd_platforms(args, cfg):
    cat = _catalog(cfg)
    header = ("name", "sa_latency_s", "sa_throughput_hz", "response_s", "total_s", "tdp_w", "mass_kg", "valid")
    rows = []
    for p in cat.platforms:
        try:
            validate_platform(p)
            status = "ok"
        except CatalogError as exc:
            status = str(exc)
        total = p.declared_total_s if p.declared_total_s is not None else ""
        rows.append((p.name, p.sa_latency_s, p.sa_throughput_hz, p.response_s, total, p.tdp_w, p.mass_kg, status))
    _render(cfg, "platforms", header, rows, ("{}", "{:.3f}", "{:.2f}", "{:.4f}", "{}", "{:.0f}", "{:.3f}", "{}"))
    return 0


def cmd_vmax(args, cfg):
    cat = _catalog(cfg)
    body = _lookup(cat.body, args.body)
    names = [args.platform] if args.platform else cat.platform_names()
    rows = []
    for name in names:
        p = _lookup(cat.platform, name)
        m = total_mass(body, p)
        a = max_acceleration(body, m)
        response = 2.0 * p.sa_latency_s if args.scheduling == "seq" else p.response_s
        rows.append((p.name, m, a, response, v_max_bound(a, body.sensing_range_m, response)))
    header = ("platform", "total_mass_kg", "a_max", "response_s", "v_max")
    _render(cfg, "vmax", header, rows, ("{}", "{:.3f}", "{:.2f}", "{:.3f}", "{:.2f}"))
    return 0


def cmd_mission(args, cfg):
    cat = _catalog(cfg)
    body = _lookup(cat.body, args.body)
    platforms = [_lookup(cat.platform, args.platform)] if args.platform else cat.platforms
    table = platform_table(platforms, body, args.length, args.sdr, _power_model(args.power_model))
    header = ("platform", "total_mass_kg", "a_max", "v_mass_only", "time_mass_only_s", "response_s",
              "v_max", "mission_time_s", "total_power_w", "energy_j")
    rows = [(r.platform, r.total_mass_kg, r.a_max, r.v_mass_only, r.time_mass_only_s, r.response_s,
             r.v_max, r.mission_time_s, r.total_power_w, r.energy_j) for r in table]
    fmt = ("{}", "{:.3f}", "{:.2f}", "{:.2f}", "{:.1f}", "{:.3f}", "{:.2f}", "{:.1f}", "{:.1f}", "{:.0f}")
    _render(cfg, "mission", header, rows, fmt)
    return 0


def cmd_simulate(args, cfg):
    cat = _catalog(cfg)
    body = _lookup(cat.body, args.body)
    platform = _lookup(cat.platform, args.platform)
    mission = MissionSpec.load(args.mission)
    timing = PipelineTiming(args.perception, args.planning, args.control,
                            "Pipelined" if args.scheduling == "pipe" else "Sequential")
    battery = Battery(args.battery_c, current_limit_a=args.current_limit)
    try:
        knob = parse_knob(args.knob)
        offload = parse_offload(args.offload)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    trace = simulate(mission, body, platform, timing, _power_model(args.power_model), battery,
                     knob=knob, offload=offload, dt_s=cfg.dt or 0.01)
    summary = trace.summary.to_dict()
    if cfg.out_dir is not None:
        _emit(cfg, "trace.csv", trace.to_csv())
        _emit(cfg, "summary.json", _json(summary))
    elif cfg.fmt == "csv":
        sys.stdout.write(trace.to_csv())
    else:
        sys.stdout.write(_json(summary))
    return 0


def _parse_grid(text: str) -> DesignGrid:
    path = Path(text)
    if path.exists():
        return DesignGrid.from_dict(json.loads(path.read_text(encoding="utf-8")))
    doc = {}
    for item in text.split(","):
        key, _, spec = item.partition("=")
        parts = spec.split(":")
        if key not in AXES or len(parts) != 3:
            raise UsageError(f"bad grid item {item!r}; use {AXES[0]}=MIN:MAX:STEPS,...")
        doc[key] = (float(parts[0]), float(parts[1]), int(parts[2]))
    missing = set(AXES) - set(doc)
    if missing:
        raise UsageError(f"grid missing axes: {sorted(missing)}")
    return DesignGrid.from_dict(doc)


def cmd_dse(args, cfg):
    cat = _catalog(cfg)
    body = _lookup(cat.body, args.body)
    grid = _parse_grid(args.grid)
    cons = Constraints(**json.loads(Path(args.constraints).read_text(encoding="utf-8")))
    samples = sweep(grid, body, args.length, args.sdr, cons, _power_model(args.power_model))
    if args.slice:
        axis, _, value = args.slice.partition("=")
        if axis not in AXES:
            raise UsageError(f"bad slice {args.slice!r}; use AXIS=VALUE with AXIS in {AXES}")
        axes = tuple(a for a in AXES if a != axis)
        sl = slice_samples(samples, axis, float(value))
        if not sl:
            raise UsageError(f"no lattice points at {axis}={value}")
        field = gradient_field(sl, Metric(args.metric), axes)
        _emit(cfg, "gradient.csv", field.to_csv())
    else:
        _emit(cfg, "dse.csv", samples_to_csv(samples))
    return 0


def cmd_cig(args, cfg):
    g = cigmod.InteractionGraph.load(args.graph) if args.graph else cigmod.build_default_mav_graph()
    if args.paths:
        paths = cigmod.enumerate_impact_paths(g, args.source, args.sinks.split(","))
        if cfg.fmt == "json":
            _emit(cfg, "paths.json", _json([{"cluster": p.cluster.value, "nodes": list(p.nodes)} for p in paths]))
        else:
            _emit(cfg, "paths.txt", "".join(f"{p}\n" for p in paths))
    else:
        _emit(cfg, "graph.json", g.dumps() + "\n")
    return 0


def cmd_casestudy(args, cfg):
    sc = load_scenario(args.scenario, _catalog(cfg))
    traces = run_scenario(sc, dt_s=cfg.dt)
    checks = knob_checks(traces) if args.scenario == "knob" else offload_checks(traces)
    report = {
        "scenario": sc.name,
        "variants": {k: t.summary.to_dict() for k, t in traces.items()},
        "checks": checks,
    }
    if cfg.out_dir is not None:
        for k, t in traces.items():
            _emit(cfg, f"{sc.name}-{k}-trace.csv", t.to_csv())
    if cfg.fmt == "json" or cfg.out_dir is not None:
        _emit(cfg, f"{sc.name}-summary.json", _json(report))
    else:
        lines = [f"scenario: {sc.name}"]
        for k, t in traces.items():
            s = t.summary
            status = s.status.value + (f"({s.failure.value})" if s.failure else "")
            lines.append(f"  {k:20s} {status:22s} time {s.mission_time_s:8.1f} s  energy {s.energy_j / 1e3:8.1f} kJ"
                         f"  hover {s.hover_s:6.1f} s  battery left {s.battery_frac_remaining:6.1%}")
        lines += [f"  [{'PASS' if ok else 'FAIL'}] {name}" for name, ok in checks.items()]
        sys.stdout.write("\n".join(lines) + "\n")
    return 0 if all(checks.values()) else 2


def build_parser() -> argparse.ArgumentParser:
    # Global options are accepted before or after the subcommand.
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--catalog", help="catalog JSON (default: $MAVCODESIGN_CATALOG or bundled)")
    common.add_argument("--out", type=Path, help="write outputs into this directory instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), help="machine-readable output (default: table)")
    common.add_argument("--dt", type=float, help="simulation tick in seconds")
    common.add_argument("-v", "--verbose", action="count")

    p = _Parser(prog="mavcodesign", parents=[common],
                description="Compute/physics co-design analyses for micro aerial vehicles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    sub.add_parser("platforms", help="list catalog platforms with validation")

    s = sub.add_parser("vmax", help="compute-bounded maximum velocity")
    s.add_argument("--body")
    s.add_argument("--platform")
    s.add_argument("--scheduling", choices=("seq", "pipe"), default="pipe")

    s = sub.add_parser("mission", help="analytic mission time/energy for each platform")
    s.add_argument("--length", type=float, default=1000.0)
    s.add_argument("--sdr", type=float, default=4.0)
    s.add_argument("--body")
    s.add_argument("--platform")
    s.add_argument("--power-model", choices=("affine", "parametric"), default="affine")

    s = sub.add_parser("simulate", help="closed-loop mission simulation")
    s.add_argument("--mission", required=True)
    s.add_argument("--platform", required=True)
    s.add_argument("--body")
    s.add_argument("--knob", help="static:R or dynamic:Outdoor=R,Indoor=R")
    s.add_argument("--offload", help="SPEEDUP,RTT[,exclude-tdp]")
    s.add_argument("--perception", type=float, default=0.45)
    s.add_argument("--planning", type=float, default=0.2)
    s.add_argument("--control", type=float, default=0.1)
    s.add_argument("--scheduling", choices=("seq", "pipe"), default="seq")
    s.add_argument("--battery-c", type=float, default=40000.0)
    s.add_argument("--current-limit", type=float, default=100.0)
    s.add_argument("--power-model", choices=("affine", "parametric"), default="affine")

    s = sub.add_parser("dse", help="design-space sweep")
    s.add_argument("--grid", required=True, help="JSON file or mass_kg=a:b:n,power_w=a:b:n,response_s=a:b:n")
    s.add_argument("--constraints", required=True, help="JSON file with Constraints fields")
    s.add_argument("--slice", help="AXIS=VALUE: emit the gradient field of that slice")
    s.add_argument("--metric", choices=[m.value for m in Metric], default=Metric.MISSION_TIME.value)
    s.add_argument("--length", type=float, default=1000.0)
    s.add_argument("--sdr", type=float, default=4.0)
    s.add_argument("--body")
    s.add_argument("--power-model", choices=("affine", "parametric"), default="affine")

    s = sub.add_parser("cig", help="cyber-physical interaction graph")
    s.add_argument("--paths", action="store_true", help="list impact paths")
    s.add_argument("--graph", help="graph JSON (default: built-in MAV graph)")
    s.add_argument("--source", default="Compute")
    s.add_argument("--sinks", default="MissionTime,MissionEnergy")

    s = sub.add_parser("casestudy", help="bundled knob/offload scenarios")
    s.add_argument("scenario", choices=("knob", "offload"))
    return p


COMMANDS = {
    "platforms": cmd_platforms,
    "vmax": cmd_vmax,
    "mission": cmd_mission,
    "simulate": cmd_simulate,
    "dse": cmd_dse,
    "cig": cmd_cig,
    "casestudy": cmd_casestudy,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    opts = {k: getattr(args, k, None) for k in ("catalog", "out", "format", "dt")}
    verbose = getattr(args, "verbose", None) or 0
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(levelname)s %(message)s")
    try:
        cfg = CliConfig(opts["catalog"], opts["out"], opts["format"], opts["dt"], verbose)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"mavcodesign: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"mavcodesign: error: {exc}", file=sys.stderr)
        return 1
    except (CatalogError, CannotHoverError, cigmod.GraphError, ValueError, KeyError) as exc:
        print(f"mavcodesign: domain error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
