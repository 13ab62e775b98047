"""Physical-quantity models: mass, thrust-limited acceleration, power, energy, battery."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

import numpy as np

DEFAULT_GRAVITY = 9.81
# T_max obtained by inverting the thrust/acceleration relation at 2.544 kg, 9.8 m/s^2.
DEFAULT_T_MAX_N = 35.28
# 11.7 m/s stopping from 9.8 m/s^2: 11.7**2 / (2 * 9.8).
DEFAULT_SENSING_RANGE_M = 6.98
DEFAULT_BASE_MASS_KG = 2.400
DEFAULT_WIDTH_M = 0.65

DJI_COEFFS = (-1.526, 3.934, 0.968, 18.125, 96.613, -1.085, 0.22, 1.332, 433.9)
# Rotor-power anchors: paper totals 521 W (TX2) and 770 W (i9) minus their TDPs.
HOVER_ANCHORS = ((2.544, 506.0), (3.509, 605.0))


class CannotHoverError(ValueError):
    """Total weight exceeds the available thrust."""


class CurrentLimitExceeded(ValueError):
    """Requested current is above what the battery can deliver."""


@dataclass(frozen=True)
class DroneBody:
    name: str = "DJI-M100"
    base_mass_kg: float = DEFAULT_BASE_MASS_KG
    t_max_n: float = DEFAULT_T_MAX_N
    sensing_range_m: float = DEFAULT_SENSING_RANGE_M
    width_m: float = DEFAULT_WIDTH_M
    gravity: float = DEFAULT_GRAVITY

    def __post_init__(self):
        for name in ("base_mass_kg", "t_max_n", "sensing_range_m", "width_m", "gravity"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"body {self.name!r}: {name} must be > 0, got {v}")
        if self.t_max_n <= self.base_mass_kg * self.gravity:
            raise CannotHoverError(
                f"body {self.name!r}: thrust {self.t_max_n} N cannot lift its own "
                f"{self.base_mass_kg} kg"
            )


@dataclass(frozen=True)
class ComputePlatform:
    name: str
    sa_latency_s: float
    sa_throughput_hz: float
    tdp_w: float
    mass_kg: float
    declared_total_s: float | None = None

    @property
    def response_s(self) -> float:
        return self.sa_latency_s + 1.0 / self.sa_throughput_hz


def total_mass(body: DroneBody, platform: ComputePlatform | float) -> float:
    extra = platform.mass_kg if isinstance(platform, ComputePlatform) else float(platform)
    return body.base_mass_kg + extra


def max_acceleration(body: DroneBody, m_total: float) -> float:
    if m_total <= 0:
        raise ValueError(f"mass must be > 0, got {m_total}")
    weight = m_total * body.gravity
    if weight > body.t_max_n:
        raise CannotHoverError(
            f"cannot-hover: weight {weight:.3f} N exceeds max thrust {body.t_max_n} N"
        )
    return math.sqrt(body.t_max_n**2 - weight**2) / m_total


class PowerModel(Protocol):
    def __call__(
        self,
        mass: float,
        v_xy: float = 0.0,
        a_xy: float = 0.0,
        v_z: float = 0.0,
        a_z: float = 0.0,
        wind_dot: float = 0.0,
    ) -> float: ...


@dataclass(frozen=True)
class PowerModelParams:
    coeffs: tuple[float, ...] = DJI_COEFFS

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) != 9:
            raise ValueError(f"power model needs exactly 9 coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def horizontal(self):
        return self.coeffs[0:3]

    @property
    def vertical(self):
        return self.coeffs[3:6]

    @property
    def misc(self):
        return self.coeffs[6:9]

    def to_list(self) -> list[float]:
        return list(self.coeffs)


def rotor_power_parametric(
    params: PowerModelParams,
    v_xy: float,
    a_xy: float,
    v_z: float,
    a_z: float,
    m: float,
    wind_dot: float,
) -> float:
    v_xy, a_xy, v_z, a_z = abs(v_xy), abs(a_xy), abs(v_z), abs(a_z)
    b = params.coeffs
    return (
        b[0] * v_xy + b[1] * a_xy + b[2] * v_xy * a_xy
        + b[3] * v_z + b[4] * a_z + b[5] * v_z * a_z
        + b[6] * m + b[7] * wind_dot + b[8]
    )


@dataclass(frozen=True)
class ParametricPower:
    """Nine-coefficient kinematic power regression (DJI defaults)."""

    params: PowerModelParams = PowerModelParams()

    def __call__(self, mass, v_xy=0.0, a_xy=0.0, v_z=0.0, a_z=0.0, wind_dot=0.0) -> float:
        return rotor_power_parametric(self.params, v_xy, a_xy, v_z, a_z, mass, wind_dot)


@dataclass(frozen=True)
class AffineHoverPower:
    """Rotor power as c0 + c1 * total mass; kinematic arguments are ignored."""

    c0: float
    c1: float

    @classmethod
    def from_anchors(cls, anchors=HOVER_ANCHORS) -> "AffineHoverPower":
        return cls(*fit_affine_hover_power(anchors))

    def __call__(self, mass, v_xy=0.0, a_xy=0.0, v_z=0.0, a_z=0.0, wind_dot=0.0) -> float:
        return self.c0 + self.c1 * mass


def fit_affine_hover_power(anchors: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares line through (mass, rotor watts) anchors; returns (c0, c1)."""
    pts = np.asarray(anchors, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError("need at least two (mass, watts) anchors")
    if np.ptp(pts[:, 0]) == 0:
        raise ValueError("anchors must have distinct masses")
    A = np.column_stack([np.ones(len(pts)), pts[:, 0]])
    (c0, c1), *_ = np.linalg.lstsq(A, pts[:, 1], rcond=None)
    return float(c0), float(c1)


def total_power(rotor_w: float, tdp_w: float) -> float:
    return rotor_w + tdp_w


def mission_energy(power_w: float, duration_s: float) -> float:
    return power_w * duration_s


def integrate_energy(power_samples: Sequence[float], dt_s: float) -> float:
    """Left-Riemann energy over uniformly spaced power samples."""
    return float(np.sum(np.asarray(power_samples, dtype=float)) * dt_s)


# Open-circuit voltage knots as (charge fraction, fraction of the voltage span).
_VOLTAGE_KNOTS_F = (0.0, 0.1, 0.9, 1.0)
_VOLTAGE_KNOTS_V = (0.0, 0.4, 0.9, 1.0)


@dataclass(frozen=True)
class Battery:
    capacity_c: float
    v_full: float = 12.6
    v_empty: float = 9.0
    current_limit_a: float = 100.0
    charge_c: float | None = None

    def __post_init__(self):
        if self.charge_c is None:
            object.__setattr__(self, "charge_c", float(self.capacity_c))
        if not (self.capacity_c > 0 and self.current_limit_a > 0 and self.v_empty > 0):
            raise ValueError("battery capacity, current limit and voltages must be > 0")
        if not self.v_empty < self.v_full:
            raise ValueError("v_empty must be below v_full")
        if not 0 <= self.charge_c <= self.capacity_c:
            raise ValueError(f"charge {self.charge_c} outside [0, {self.capacity_c}]")

    @property
    def fraction(self) -> float:
        return self.charge_c / self.capacity_c

    @property
    def depleted(self) -> bool:
        return self.charge_c <= 0.0


def battery_voltage(b: Battery) -> float:
    span = b.v_full - b.v_empty
    f = b.fraction
    for (f0, f1), (k0, k1) in zip(
        zip(_VOLTAGE_KNOTS_F, _VOLTAGE_KNOTS_F[1:]), zip(_VOLTAGE_KNOTS_V, _VOLTAGE_KNOTS_V[1:])
    ):
        if f <= f1:
            k = k0 + (k1 - k0) * (f - f0) / (f1 - f0)
            return b.v_empty + k * span
    return b.v_full


def battery_current(b: Battery, power_w: float) -> float:
    return power_w / battery_voltage(b)


def battery_step(b: Battery, power_w: float, dt_s: float) -> Battery:
    if dt_s <= 0:
        raise ValueError(f"dt must be > 0, got {dt_s}")
    if power_w < 0:
        raise ValueError(f"power must be >= 0, got {power_w}")
    if b.charge_c <= 0:
        raise ValueError("battery is already depleted")
    current = battery_current(b, power_w)
    if current > b.current_limit_a:
        raise CurrentLimitExceeded(
            f"current-limit-exceeded: {current:.2f} A > {b.current_limit_a} A"
        )
    return replace(b, charge_c=max(0.0, b.charge_c - current * dt_s))
