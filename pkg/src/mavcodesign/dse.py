"""Design-space sweeps over compute mass, compute power and response time."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .dynamics import CannotHoverError, DroneBody, PowerModel, max_acceleration
from .pipeline import v_max_bound

AXES = ("mass_kg", "power_w", "response_s")
SAMPLE_COLUMNS = ("mass_kg", "power_w", "response_s", "mission_time_s", "energy_j", "feasible", "reason")
GRADIENT_COLUMNS = ("axis1", "axis2", "grad1", "grad2", "defined")


class Reason(str, Enum):
    PAYLOAD_EXCEEDED = "PayloadExceeded"
    BATTERY_INSUFFICIENT = "BatteryInsufficient"
    CURRENT_LIMIT = "CurrentLimit"
    CANNOT_HOVER = "CannotHover"


class Metric(str, Enum):
    MISSION_TIME = "mission_time_s"
    ENERGY = "energy_j"


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"axis min {self.lo} must be below max {self.hi}")
        if self.steps < 2:
            raise ValueError(f"axis needs at least 2 steps, got {self.steps}")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class DesignGrid:
    mass_kg: Axis
    power_w: Axis
    response_s: Axis

    @classmethod
    def from_dict(cls, doc) -> "DesignGrid":
        return cls(*(Axis(*doc[name]) for name in AXES))

    def to_dict(self) -> dict:
        return {name: [a.lo, a.hi, a.steps] for name, a in zip(AXES, (self.mass_kg, self.power_w, self.response_s))}


@dataclass(frozen=True)
class Constraints:
    payload_max_kg: float
    battery_energy_j: float
    current_limit_a: float
    nominal_voltage_v: float

    def __post_init__(self):
        for name in ("payload_max_kg", "battery_energy_j", "current_limit_a", "nominal_voltage_v"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class FieldSample:
    mass_kg: float
    power_w: float
    response_s: float
    mission_time_s: float
    energy_j: float
    feasible: bool
    reason: Reason | None = None
    total_power_w: float = math.nan

    def axis(self, name: str) -> float:
        return getattr(self, name)

    def metric(self, m: Metric) -> float:
        return getattr(self, Metric(m).value)


def is_feasible(
    mass_kg: float,
    total_power_w: float,
    energy_j: float,
    constraints: Constraints,
    can_hover: bool = True,
) -> tuple[bool, Reason | None]:
    if not can_hover:
        return False, Reason.CANNOT_HOVER
    if mass_kg > constraints.payload_max_kg:
        return False, Reason.PAYLOAD_EXCEEDED
    if total_power_w / constraints.nominal_voltage_v > constraints.current_limit_a:
        return False, Reason.CURRENT_LIMIT
    if energy_j > constraints.battery_energy_j:
        return False, Reason.BATTERY_INSUFFICIENT
    return True, None


def evaluate_point(
    mass_kg: float,
    power_w: float,
    response_s: float,
    body: DroneBody,
    path_length_m: float,
    sdr: float,
    constraints: Constraints,
    power_model: PowerModel,
) -> FieldSample:
    m_total = body.base_mass_kg + mass_kg
    try:
        a = max_acceleration(body, m_total)
    except CannotHoverError:
        return FieldSample(mass_kg, power_w, response_s, math.nan, math.nan, False, Reason.CANNOT_HOVER)
    v = v_max_bound(a, body.sensing_range_m, response_s)
    if v <= 0:
        return FieldSample(mass_kg, power_w, response_s, math.inf, math.inf, False, Reason.CANNOT_HOVER)
    t = path_length_m * sdr / v
    # steady cruise: average speed, no acceleration
    p_total = power_model(m_total, v_xy=v / sdr) + power_w
    e = p_total * t
    ok, reason = is_feasible(mass_kg, p_total, e, constraints)
    return FieldSample(mass_kg, power_w, response_s, t, e, ok, reason, p_total)


def sweep(
    grid: DesignGrid,
    body: DroneBody,
    path_length_m: float,
    sdr: float,
    constraints: Constraints,
    power_model: PowerModel,
) -> list[FieldSample]:
    """Evaluate every lattice point; mass outermost, response innermost."""
    return [
        evaluate_point(float(m), float(p), float(r), body, path_length_m, sdr, constraints, power_model)
        for m in grid.mass_kg.values()
        for p in grid.power_w.values()
        for r in grid.response_s.values()
    ]


def slice_samples(samples: Iterable[FieldSample], axis: str, value: float, rel_tol: float = 1e-9) -> list[FieldSample]:
    return [s for s in samples if math.isclose(s.axis(axis), value, rel_tol=rel_tol, abs_tol=1e-12)]


def _lattice(samples: Sequence[FieldSample], axes: tuple[str, str]):
    a1 = sorted({s.axis(axes[0]) for s in samples})
    a2 = sorted({s.axis(axes[1]) for s in samples})
    if len(a1) < 2 or len(a2) < 2:
        raise ValueError("lattice needs at least two values on each axis")
    idx1 = {v: i for i, v in enumerate(a1)}
    idx2 = {v: j for j, v in enumerate(a2)}
    cells: list[list[FieldSample | None]] = [[None] * len(a2) for _ in a1]
    for s in samples:
        i, j = idx1[s.axis(axes[0])], idx2[s.axis(axes[1])]
        if cells[i][j] is not None:
            raise ValueError(f"ragged lattice: duplicate point at {axes[0]}={a1[i]}, {axes[1]}={a2[j]}")
        cells[i][j] = s
    if any(c is None for row in cells for c in row):
        raise ValueError("ragged lattice: missing points")
    return np.array(a1), np.array(a2), cells


@dataclass(frozen=True)
class GradientField:
    axes: tuple[str, str]
    axis1: np.ndarray
    axis2: np.ndarray
    grad1: np.ndarray
    grad2: np.ndarray
    defined: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(GRADIENT_COLUMNS)
        for i, x1 in enumerate(self.axis1):
            for j, x2 in enumerate(self.axis2):
                w.writerow([repr(float(x1)), repr(float(x2)), repr(float(self.grad1[i, j])),
                            repr(float(self.grad2[i, j])), str(bool(self.defined[i, j])).lower()])
        return buf.getvalue()


def _diff_along(values, coords, ok, axis):
    f = np.moveaxis(values, axis, 0)
    okm = np.moveaxis(ok, axis, 0)
    n = f.shape[0]
    g = np.full(f.shape, np.nan)
    good = np.zeros(f.shape, dtype=bool)
    for i in range(n):
        lo, hi = (i - 1, i + 1) if 0 < i < n - 1 else ((0, 1) if i == 0 else (n - 2, n - 1))
        g[i] = (f[hi] - f[lo]) / (coords[hi] - coords[lo])
        good[i] = okm[lo] & okm[hi] & okm[i]
    return np.moveaxis(g, 0, axis), np.moveaxis(good, 0, axis)


def gradient_field(
    samples: Sequence[FieldSample],
    metric: Metric | str,
    axes: tuple[str, str],
    values: np.ndarray | None = None,
) -> GradientField:
    """Finite-difference gradient of ``metric`` over a 2-D lattice slice.

    Central differences inside, one-sided at the borders. A cell is undefined when any
    point of its stencil is infeasible. ``values`` overrides the metric with an
    arbitrary field laid out like the lattice (used for synthetic checks).
    """
    for a in axes:
        if a not in AXES:
            raise ValueError(f"unknown axis {a!r}")
    c1, c2, cells = _lattice(samples, axes)
    if values is None:
        m = Metric(metric)
        f = np.array([[c.metric(m) for c in row] for row in cells], dtype=float)
    else:
        f = np.asarray(values, dtype=float)
    ok = np.array([[c.feasible and math.isfinite(f[i, j]) for j, c in enumerate(row)]
                   for i, row in enumerate(cells)])
    g1, d1 = _diff_along(f, c1, ok, 0)
    g2, d2 = _diff_along(f, c2, ok, 1)
    defined = d1 & d2
    g1 = np.where(defined, g1, np.nan)
    g2 = np.where(defined, g2, np.nan)
    return GradientField(tuple(axes), c1, c2, g1, g2, defined)


def sensitivity(samples: Sequence[FieldSample], metric: Metric | str, axis: str) -> tuple[float, float]:
    """Mean and population std of midpoint-normalised elasticities along ``axis``.

    Each feasible adjacent pair (other axes fixed) contributes
    |dM / mean(M)| / |dq / mean(q)|.
    """
    m = Metric(metric)
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    others = [a for a in AXES if a != axis]
    lines: dict[tuple[float, ...], list[FieldSample]] = {}
    for s in samples:
        lines.setdefault(tuple(s.axis(o) for o in others), []).append(s)
    values = []
    for line in lines.values():
        line.sort(key=lambda s: s.axis(axis))
        for s0, s1 in zip(line, line[1:]):
            if not (s0.feasible and s1.feasible):
                continue
            q0, q1 = s0.axis(axis), s1.axis(axis)
            f0, f1 = s0.metric(m), s1.metric(m)
            dq = abs(q1 - q0) / abs(0.5 * (q0 + q1))
            f_mid = 0.5 * (f0 + f1)
            if dq == 0 or f_mid == 0:
                continue
            values.append(abs(f1 - f0) / abs(f_mid) / dq)
    if not values:
        raise ValueError(f"no feasible adjacent pairs along {axis}")
    arr = np.array(values)
    return float(arr.mean()), float(arr.std())


def feasible_area(samples: Iterable[FieldSample], power_w: float) -> int:
    """Number of feasible (mass, response) cells on one power slice."""
    return sum(1 for s in slice_samples(samples, "power_w", power_w) if s.feasible)


def samples_to_csv(samples: Iterable[FieldSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SAMPLE_COLUMNS)
    for s in samples:
        w.writerow([
            repr(s.mass_kg), repr(s.power_w), repr(s.response_s),
            repr(s.mission_time_s), repr(s.energy_j),
            str(s.feasible).lower(), s.reason.value if s.reason else "",
        ])
    return buf.getvalue()
