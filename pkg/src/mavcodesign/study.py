"""Whole-vehicle studies: the four-platform comparison and bundled case-study scenarios."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .catalog import CatalogFile, default_catalog
from .dynamics import (
    AffineHoverPower,
    Battery,
    ComputePlatform,
    DroneBody,
    PowerModel,
    max_acceleration,
    total_mass,
    total_power,
)
from .pipeline import PipelineTiming, avg_velocity, mission_time, v_max_bound
from .sim import (
    DynamicResolution,
    MissionSpec,
    OffloadConfig,
    ResolutionCurve,
    SimTrace,
    StaticResolution,
    simulate,
)


@dataclass(frozen=True)
class PlatformRow:
    platform: str
    total_mass_kg: float
    a_max: float
    response_s: float
    v_mass_only: float
    time_mass_only_s: float
    v_max: float
    mission_time_s: float
    total_power_w: float
    energy_j: float


def platform_row(
    platform: ComputePlatform,
    body: DroneBody,
    path_length_m: float,
    sdr: float,
    power_model: PowerModel,
) -> PlatformRow:
    """Mass-only (zero response) and combined (mass + response) figures for one platform."""
    m = total_mass(body, platform)
    a = max_acceleration(body, m)
    d = body.sensing_range_m
    v0 = v_max_bound(a, d, 0.0)
    v = v_max_bound(a, d, platform.response_s)
    t = mission_time(path_length_m, avg_velocity(v, sdr))
    p = total_power(power_model(m, v_xy=v / sdr), platform.tdp_w)
    return PlatformRow(
        platform=platform.name,
        total_mass_kg=m,
        a_max=a,
        response_s=platform.response_s,
        v_mass_only=v0,
        time_mass_only_s=mission_time(path_length_m, avg_velocity(v0, sdr)),
        v_max=v,
        mission_time_s=t,
        total_power_w=p,
        energy_j=p * t,
    )


def platform_table(
    platforms,
    body: DroneBody,
    path_length_m: float = 1000.0,
    sdr: float = 4.0,
    power_model: PowerModel | None = None,
) -> list[PlatformRow]:
    power_model = power_model or AffineHoverPower.from_anchors()
    return [platform_row(p, body, path_length_m, sdr, power_model) for p in platforms]


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    mission: MissionSpec
    platform: ComputePlatform
    body: DroneBody
    timing: PipelineTiming
    battery: Battery
    curve: ResolutionCurve
    dt_s: float
    variants: dict


def load_scenario(source: str | Path, catalog: CatalogFile | None = None) -> Scenario:
    """Load a bundled scenario by name (``knob``/``offload``) or a JSON path."""
    catalog = catalog or default_catalog()
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        doc = json.loads(path.read_text(encoding="utf-8"))
        name = path.stem
    else:
        ref = resources.files("mavcodesign.data").joinpath("scenarios", f"{source}.json")
        if not ref.is_file():
            raise KeyError(f"unknown scenario {source!r}")
        doc = json.loads(ref.read_text("utf-8"))
        name = str(source)
    curve = ResolutionCurve(tuple(map(tuple, doc["resolution_curve"]))) if "resolution_curve" in doc else ResolutionCurve()
    return Scenario(
        name=name,
        description=doc.get("description", ""),
        mission=MissionSpec.from_dict(doc["mission"]),
        platform=catalog.platform(doc["platform"]),
        body=catalog.body(doc.get("body")),
        timing=PipelineTiming(**doc["timing"]),
        battery=Battery(**doc["battery"]),
        curve=curve,
        dt_s=float(doc.get("dt_s", 0.01)),
        variants=doc.get("variants", {"default": {}}),
    )


def parse_knob(spec):
    """Knob from a scenario dict or a CLI string (``static:0.15`` / ``dynamic:Outdoor=0.8,Indoor=0.15``)."""
    if spec is None:
        return None
    if isinstance(spec, str):
        kind, _, rest = spec.partition(":")
        if kind == "static":
            return StaticResolution(float(rest))
        if kind == "dynamic":
            pairs = dict(item.split("=") for item in rest.split(",") if item)
            return DynamicResolution({k: float(v) for k, v in pairs.items()})
        raise ValueError(f"bad knob {spec!r}; use static:R or dynamic:Outdoor=R,Indoor=R")
    if "static" in spec:
        return StaticResolution(float(spec["static"]))
    if "dynamic" in spec:
        return DynamicResolution(spec["dynamic"])
    raise ValueError(f"bad knob {spec!r}")


def parse_offload(spec):
    if spec is None:
        return None
    if isinstance(spec, str):
        parts = spec.split(",")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad offload {spec!r}; use SPEEDUP,RTT[,exclude-tdp]")
        return OffloadConfig(
            speedup=float(parts[0]),
            rtt_s=float(parts[1]),
            remote_tdp_excluded=len(parts) == 3 and parts[2].strip().lower() in ("1", "true", "exclude-tdp"),
        )
    return OffloadConfig(**spec)


def run_scenario(
    scenario: Scenario,
    power_model: PowerModel | None = None,
    dt_s: float | None = None,
) -> dict[str, SimTrace]:
    power_model = power_model or AffineHoverPower.from_anchors()
    out = {}
    for name, variant in scenario.variants.items():
        out[name] = simulate(
            scenario.mission,
            scenario.body,
            scenario.platform,
            scenario.timing,
            power_model,
            scenario.battery,
            knob=parse_knob(variant.get("knob")),
            curve=scenario.curve,
            offload=parse_offload(variant.get("offload")),
            dt_s=dt_s or scenario.dt_s,
        )
    return out


def knob_checks(traces: dict[str, SimTrace]) -> dict[str, bool]:
    coarse, fine, dyn = (traces[k].summary for k in ("static-0.80", "static-0.15", "dynamic"))
    return {
        "static coarse fails with NoPath": coarse.failure is not None and coarse.failure.value == "NoPath",
        "static fine completes": fine.status.value == "Completed",
        "dynamic completes": dyn.status.value == "Completed",
        "dynamic energy <= static fine": dyn.energy_j <= fine.energy_j,
        "dynamic battery left >= static fine": dyn.battery_frac_remaining >= fine.battery_frac_remaining,
    }


def offload_checks(traces: dict[str, SimTrace]) -> dict[str, bool]:
    on, off, off_x = (traces[k].summary for k in ("onboard", "offload", "offload-remote-tdp"))
    return {
        "offload reduces hover time": off.hover_s < on.hover_s,
        "offload reduces mission time": off.mission_time_s < on.mission_time_s,
        "offload (remote TDP excluded) reduces energy": off_x.energy_j < on.energy_j,
        "all variants complete": all(s.status.value == "Completed" for s in (on, off, off_x)),
    }


def is_close_rel(value: float, target: float, tol: float) -> bool:
    return math.isfinite(value) and abs(value - target) <= tol * abs(target)
