"""Deterministic closed-loop mission simulator.

The vehicle is a point mass on a 1-D path split into segments. At each segment entry it
hovers while planning, then flies a trapezoidal velocity profile capped by the
compute-bounded safe speed divided by the segment's slow-down ratio, and stops at the
segment end. Power and battery charge are integrated with a left Riemann sum at a fixed
tick ``dt_s``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from .dynamics import (
    Battery,
    ComputePlatform,
    CurrentLimitExceeded,
    DroneBody,
    PowerModel,
    battery_step,
    battery_voltage,
    max_acceleration,
    total_mass,
)
from .pipeline import PipelineTiming, response_time, v_max_bound

TRACE_COLUMNS = ("t_s", "x_m", "v_mps", "power_w", "charge_c")


class Environment(str, Enum):
    OUTDOOR = "Outdoor"
    INDOOR = "Indoor"


@dataclass(frozen=True)
class Segment:
    length_m: float
    sdr: float = 1.0
    environment: Environment = Environment.OUTDOOR
    min_gap_m: float = math.inf
    replans: int = 1

    def __post_init__(self):
        object.__setattr__(self, "environment", Environment(self.environment))
        if self.min_gap_m is None:
            object.__setattr__(self, "min_gap_m", math.inf)
        if not self.length_m > 0:
            raise ValueError(f"segment length must be > 0, got {self.length_m}")
        if not self.min_gap_m > 0:
            raise ValueError(f"min_gap_m must be > 0, got {self.min_gap_m}")
        if self.sdr < 1:
            raise ValueError(f"slow-down ratio must be >= 1, got {self.sdr}")
        if self.replans < 0 or int(self.replans) != self.replans:
            raise ValueError(f"replans must be a non-negative integer, got {self.replans}")


@dataclass(frozen=True)
class MissionSpec:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("mission needs at least one segment")

    @property
    def length_m(self) -> float:
        return sum(s.length_m for s in self.segments)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "MissionSpec":
        return cls(tuple(Segment(**seg) for seg in doc["segments"]))

    @classmethod
    def load(cls, path) -> "MissionSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "segments": [
                {
                    "length_m": s.length_m,
                    "sdr": s.sdr,
                    "environment": s.environment.value,
                    "min_gap_m": None if math.isinf(s.min_gap_m) else s.min_gap_m,
                    "replans": s.replans,
                }
                for s in self.segments
            ]
        }


@dataclass(frozen=True)
class ResolutionCurve:
    """Map-update latency as a function of voxel size; log-log interpolated."""

    anchors: tuple[tuple[float, float], ...] = ((0.15, 0.45), (0.975, 0.10))

    def __post_init__(self):
        pts = tuple(sorted((float(r), float(t)) for r, t in self.anchors))
        if len(pts) < 2:
            raise ValueError("resolution curve needs at least two anchors")
        for (r0, t0), (r1, t1) in zip(pts, pts[1:]):
            if not (0 < r0 < r1 and t0 > t1 > 0):
                raise ValueError("latency must strictly decrease as resolution coarsens")
        object.__setattr__(self, "anchors", pts)

    @property
    def range(self) -> tuple[float, float]:
        return self.anchors[0][0], self.anchors[-1][0]


def resolution_latency(curve: ResolutionCurve, r: float) -> float:
    lo, hi = curve.range
    if not lo <= r <= hi:
        raise ValueError(f"resolution {r} m outside curve range [{lo}, {hi}]")
    for (r0, t0), (r1, t1) in zip(curve.anchors, curve.anchors[1:]):
        if r <= r1:
            w = (math.log(r) - math.log(r0)) / (math.log(r1) - math.log(r0))
            return math.exp(math.log(t0) + w * (math.log(t1) - math.log(t0)))
    raise AssertionError("unreachable")


def passable(min_gap_m: float, resolution_m: float, width_m: float) -> bool:
    # Obstacles are inflated by one voxel.
    return (min_gap_m - resolution_m) >= width_m


@dataclass(frozen=True)
class StaticResolution:
    resolution_m: float

    def resolution_for(self, env: Environment) -> float:
        return self.resolution_m

    def resolutions(self) -> tuple[float, ...]:
        return (self.resolution_m,)


@dataclass(frozen=True)
class DynamicResolution:
    by_environment: tuple[tuple[Environment, float], ...]

    def __post_init__(self):
        items = self.by_environment
        if isinstance(items, Mapping):
            items = items.items()
        object.__setattr__(
            self,
            "by_environment",
            tuple(sorted(((Environment(k), float(v)) for k, v in items), key=lambda kv: kv[0].value)),
        )

    def resolution_for(self, env: Environment) -> float:
        for k, v in self.by_environment:
            if k is env:
                return v
        raise KeyError(f"dynamic knob has no resolution for {env.value}")

    def resolutions(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.by_environment)


KnobPolicy = StaticResolution | DynamicResolution


@dataclass(frozen=True)
class OffloadConfig:
    speedup: float
    rtt_s: float = 0.0
    remote_tdp_excluded: bool = False
    stage: str = "Planning"

    def __post_init__(self):
        if self.stage != "Planning":
            raise ValueError("only the Planning stage can be offloaded")
        if not self.speedup > 0:
            raise ValueError(f"speedup must be > 0, got {self.speedup}")
        if self.rtt_s < 0:
            raise ValueError(f"rtt must be >= 0, got {self.rtt_s}")


def apply_offload(t: PipelineTiming, o: OffloadConfig) -> PipelineTiming:
    return replace(t, planning_s=t.planning_s / o.speedup + o.rtt_s)


class Status(str, Enum):
    COMPLETED = "Completed"
    FAILED = "Failed"


class FailureReason(str, Enum):
    NO_PATH = "NoPath"
    BATTERY_EMPTY = "BatteryEmpty"
    CURRENT_LIMIT = "CurrentLimit"


@dataclass(frozen=True)
class Event:
    t_s: float
    kind: str
    segment: int
    detail: str = ""


@dataclass(frozen=True)
class Summary:
    mission_time_s: float
    energy_j: float
    avg_v_mps: float
    hover_s: float
    battery_frac_remaining: float
    distance_m: float
    status: Status
    failure: FailureReason | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status.value
        d["failure"] = self.failure.value if self.failure else None
        return d


@dataclass
class SimTrace:
    """Tick-start samples plus one terminal sample (power 0) at the final state."""

    dt_s: float
    t_s: np.ndarray
    x_m: np.ndarray
    v_mps: np.ndarray
    power_w: np.ndarray
    charge_c: np.ndarray
    voltage_v: np.ndarray
    hovering: np.ndarray
    events: list[Event]
    initial_charge_c: float
    status: Status
    failure: FailureReason | None = None
    summary: Summary | None = field(default=None)

    def __len__(self):
        return len(self.t_s)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in zip(self.t_s, self.x_m, self.v_mps, self.power_w, self.charge_c):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def summarize(trace: SimTrace) -> Summary:
    if len(trace) == 0:
        raise ValueError("cannot summarize an empty trace")
    dt = trace.dt_s
    # The terminal sample carries no tick.
    ticks = len(trace) - 1
    mission_time = ticks * dt
    energy = float(np.sum(trace.power_w[:-1]) * dt)
    distance = float(trace.x_m[-1])
    return Summary(
        mission_time_s=mission_time,
        energy_j=energy,
        avg_v_mps=distance / mission_time if mission_time > 0 else 0.0,
        hover_s=float(np.count_nonzero(trace.hovering[:-1]) * dt),
        battery_frac_remaining=float(trace.charge_c[-1] / trace.initial_charge_c),
        distance_m=distance,
        status=trace.status,
        failure=trace.failure,
    )


@dataclass(frozen=True)
class _SegmentPlan:
    resolution_m: float | None
    timing: PipelineTiming
    v_cap: float
    v_target: float
    hover_s: float


def effective_timing(
    timing: PipelineTiming,
    resolution_m: float | None,
    curve: ResolutionCurve | None,
    offload: OffloadConfig | None,
) -> PipelineTiming:
    t = timing
    if resolution_m is not None:
        t = replace(t, perception_s=resolution_latency(curve, resolution_m))
    if offload is not None:
        t = apply_offload(t, offload)
    return t


def simulate(
    mission: MissionSpec,
    body: DroneBody,
    platform: ComputePlatform,
    timing: PipelineTiming,
    power_model: PowerModel,
    battery: Battery,
    knob: KnobPolicy | None = None,
    curve: ResolutionCurve | None = None,
    offload: OffloadConfig | None = None,
    dt_s: float = 0.01,
) -> SimTrace:
    if not (math.isfinite(dt_s) and dt_s > 0):
        raise ValueError(f"dt must be > 0, got {dt_s}")
    if knob is not None and curve is None:
        curve = ResolutionCurve()
    if knob is not None:
        lo, hi = curve.range
        for r in knob.resolutions():
            if not lo <= r <= hi:
                raise ValueError(f"knob resolution {r} m outside curve range [{lo}, {hi}]")

    mass = total_mass(body, platform)
    a_max = max_acceleration(body, mass)
    tdp = 0.0 if (offload is not None and offload.remote_tdp_excluded) else platform.tdp_w

    plans = []
    for seg in mission.segments:
        r = knob.resolution_for(seg.environment) if knob is not None else None
        eff = effective_timing(timing, r, curve, offload)
        positive = [s for s in eff.stages if s > 0]
        if positive and dt_s > 0.1 * min(positive) * (1 + 1e-9):
            raise ValueError(
                f"dt {dt_s} s too coarse: must be <= 0.1 x smallest stage latency {min(positive)} s"
            )
        v_cap = v_max_bound(a_max, body.sensing_range_m, response_time(eff))
        plans.append(_SegmentPlan(r, eff, v_cap, v_cap / seg.sdr, seg.replans * eff.planning_s))

    ts, xs, vs, ps, qs, volts, hov = [], [], [], [], [], [], []
    events: list[Event] = []
    status, failure = Status.COMPLETED, None
    k = 0
    x = 0.0
    bat = battery
    hover_power = power_model(mass) + tdp
    prev_res = None

    def tick(v, v_next, power, hovering):
        # Records the tick-start sample, then advances the battery; returns False to stop.
        nonlocal k, bat, status, failure
        ts.append(k * dt_s)
        xs.append(x)
        vs.append(v)
        ps.append(power)
        qs.append(bat.charge_c)
        volts.append(battery_voltage(bat))
        hov.append(hovering)
        try:
            bat = battery_step(bat, power, dt_s)
        except CurrentLimitExceeded as exc:
            status, failure = Status.FAILED, FailureReason.CURRENT_LIMIT
            events.append(Event(k * dt_s, "failure", seg_idx, str(exc)))
            # The failing tick draws nothing.
            ps[-1] = 0.0
            return False
        k += 1
        if bat.depleted:
            status, failure = Status.FAILED, FailureReason.BATTERY_EMPTY
            events.append(Event(k * dt_s, "failure", seg_idx, "battery empty"))
            return False
        return True

    running = True
    seg_start = 0.0
    for seg_idx, (seg, plan) in enumerate(zip(mission.segments, plans)):
        events.append(Event(k * dt_s, "segment-enter", seg_idx, seg.environment.value))
        if plan.resolution_m is not None and plan.resolution_m != prev_res:
            if prev_res is not None:
                events.append(
                    Event(k * dt_s, "knob-switch", seg_idx, f"{prev_res} -> {plan.resolution_m}")
                )
            prev_res = plan.resolution_m
        gap_ok = passable(seg.min_gap_m, plan.resolution_m or 0.0, body.width_m)
        if not gap_ok:
            status, failure = Status.FAILED, FailureReason.NO_PATH
            events.append(
                Event(k * dt_s, "failure", seg_idx, f"no passage through {seg.min_gap_m} m gap")
            )
            break

        n_hover = int(round(plan.hover_s / dt_s))
        if n_hover:
            events.append(Event(k * dt_s, "plan-start", seg_idx, f"{plan.hover_s} s"))
            for _ in range(n_hover):
                if not tick(0.0, 0.0, hover_power, True):
                    running = False
                    break
            if not running:
                break
            events.append(Event(k * dt_s, "plan-stop", seg_idx, ""))

        seg_end = seg_start + seg.length_m
        v = 0.0
        dv = a_max * dt_s
        while True:
            s_rem = seg_end - x
            # Largest v_next whose stopping distance still fits after this tick's travel.
            disc = dv * dv + 4.0 * (2.0 * a_max * s_rem - dv * v)
            brake = 0.5 * (-dv + math.sqrt(disc)) if disc > 0 else 0.0
            v_next = min(plan.v_target, v + dv, brake)
            v_next = max(v_next, v - dv, 0.0)
            step = 0.5 * (v + v_next) * dt_s
            done = step >= s_rem
            if done:
                v_next = 0.0
            accel = abs(v_next - v) / dt_s
            power = power_model(mass, v_xy=v, a_xy=accel) + tdp
            if not tick(v, v_next, power, False):
                running = False
                break
            if done:
                x = seg_end
                break
            x += step
            v = v_next
        if not running:
            break
        seg_start = seg_end

    if status is Status.COMPLETED:
        events.append(Event(k * dt_s, "complete", len(mission.segments) - 1, ""))

    # terminal sample
    ts.append(k * dt_s)
    xs.append(x)
    vs.append(0.0 if status is Status.COMPLETED else (vs[-1] if vs else 0.0))
    ps.append(0.0)
    qs.append(bat.charge_c)
    volts.append(battery_voltage(bat))
    hov.append(False)

    trace = SimTrace(
        dt_s=dt_s,
        t_s=np.array(ts),
        x_m=np.array(xs),
        v_mps=np.array(vs),
        power_w=np.array(ps),
        charge_c=np.array(qs),
        voltage_v=np.array(volts),
        hovering=np.array(hov, dtype=bool),
        events=events,
        initial_charge_c=battery.charge_c,
        status=status,
        failure=failure,
    )
    trace.summary = summarize(trace)
    return trace


def segment_caps(
    mission: MissionSpec,
    body: DroneBody,
    platform: ComputePlatform,
    timing: PipelineTiming,
    knob: KnobPolicy | None = None,
    curve: ResolutionCurve | None = None,
    offload: OffloadConfig | None = None,
) -> list[float]:
    """Per-segment safe-speed caps the simulator would use."""
    if knob is not None and curve is None:
        curve = ResolutionCurve()
    a_max = max_acceleration(body, total_mass(body, platform))
    caps = []
    for seg in mission.segments:
        r = knob.resolution_for(seg.environment) if knob is not None else None
        eff = effective_timing(timing, r, curve, offload)
        caps.append(v_max_bound(a_max, body.sensing_range_m, response_time(eff)))
    return caps
