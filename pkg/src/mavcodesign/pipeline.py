"""Closed-form sense-plan-act timing and compute-bounded velocity models.

All quantities are SI scalars (seconds, metres, m/s, m/s^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum


class Scheduling(str, Enum):
    SEQUENTIAL = "Sequential"
    PIPELINED = "Pipelined"


@dataclass(frozen=True)
class PipelineTiming:
    perception_s: float
    planning_s: float
    control_s: float
    scheduling: Scheduling = Scheduling.SEQUENTIAL

    def __post_init__(self):
        for name in ("perception_s", "planning_s", "control_s"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        object.__setattr__(self, "scheduling", Scheduling(self.scheduling))

    @property
    def stages(self) -> tuple[float, float, float]:
        return (self.perception_s, self.planning_s, self.control_s)

    @property
    def is_instantaneous(self) -> bool:
        return not any(self.stages)

    def with_stage(self, **changes) -> "PipelineTiming":
        return replace(self, **changes)


@dataclass(frozen=True)
class ResponseProfile:
    sa_latency_s: float
    sa_throughput_hz: float
    blind_s: float
    response_s: float

    @classmethod
    def from_measured(cls, sa_latency_s: float, sa_throughput_hz: float) -> "ResponseProfile":
        """Profile from a measured latency/throughput pair (e.g. a platform table row)."""
        if not (sa_latency_s > 0 and sa_throughput_hz > 0):
            raise ValueError("latency and throughput must be > 0")
        blind = 1.0 / sa_throughput_hz
        return cls(sa_latency_s, sa_throughput_hz, blind, sa_latency_s + blind)


def sa_latency(t: PipelineTiming) -> float:
    return t.perception_s + t.planning_s + t.control_s


def response_profile(t: PipelineTiming) -> ResponseProfile:
    if t.is_instantaneous:
        raise ValueError("all pipeline stages are zero; response is undefined")
    latency = sa_latency(t)
    if t.scheduling is Scheduling.SEQUENTIAL:
        blind = latency
    else:
        blind = max(t.stages)
    return ResponseProfile(
        sa_latency_s=latency,
        sa_throughput_hz=1.0 / blind,
        blind_s=blind,
        response_s=latency + blind,
    )


def response_time(t: PipelineTiming) -> float:
    """Response time, with an all-zero timing treated as an ideal pipeline (0 s)."""
    if t.is_instantaneous:
        return 0.0
    return response_profile(t).response_s


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")


def v_max_bound(a_max: float, d: float, response_s: float) -> float:
    """Fastest speed that still lets the vehicle stop within ``d`` after reacting."""
    _check_finite(a_max=a_max, d=d, response_s=response_s)
    if a_max <= 0:
        raise ValueError(f"a_max must be > 0, got {a_max}")
    if d < 0 or response_s < 0:
        raise ValueError("d and response_s must be >= 0")
    if response_s == 0.0:
        return math.sqrt(2.0 * a_max * d)
    r = response_s
    return a_max * (math.sqrt(r * r + 2.0 * d / a_max) - r)


def v_max_sequential(a_max: float, d: float, latency_s: float) -> float:
    """Sequential-pipeline bound written directly in terms of the SA latency."""
    _check_finite(a_max=a_max, d=d, latency_s=latency_s)
    return a_max * (math.sqrt(4.0 * latency_s**2 + 2.0 * d / a_max) - 2.0 * latency_s)


def dv_max_dresponse(a_max: float, d: float, response_s: float) -> float:
    """Closed-form derivative of v_max_bound with respect to response time."""
    r = response_s
    return a_max * (r / math.sqrt(r * r + 2.0 * d / a_max) - 1.0)


def stopping_distance(v: float, a_max: float) -> float:
    if a_max <= 0:
        raise ValueError(f"a_max must be > 0, got {a_max}")
    if v < 0:
        raise ValueError(f"v must be >= 0, got {v}")
    return v * v / (2.0 * a_max)


def worst_case_clearance(d: float, v: float, profile: ResponseProfile) -> float:
    # Negative means the vehicle cannot stop in time at this speed.
    return d - v * profile.blind_s - v * profile.sa_latency_s


def avg_velocity(v_max: float, sdr: float) -> float:
    if sdr < 1:
        raise ValueError(f"slow-down ratio must be >= 1, got {sdr}")
    if v_max < 0:
        raise ValueError(f"v_max must be >= 0, got {v_max}")
    return v_max / sdr


def mission_time(path_length_m: float, v_avg: float) -> float:
    if v_avg <= 0:
        raise ValueError(f"average velocity must be > 0, got {v_avg}")
    if path_length_m < 0:
        raise ValueError(f"path length must be >= 0, got {path_length_m}")
    return path_length_m / v_avg
