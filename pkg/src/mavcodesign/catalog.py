"""Compute-platform and airframe catalog: built-ins, JSON loading, validation.

File schema (UTF-8 JSON)::

    {
      "platforms": [{"name": "Jetson TX2", "sa_latency_s": 0.717, "sa_throughput_hz": 2.49,
                     "tdp_w": 15, "mass_g": 144, "total_s": 1.119}],
      "bodies": [{"name": "DJI-M100", "base_mass_kg": 2.4, "t_max_n": 35.28,
                  "sensing_range_m": 6.98, "width_m": 0.65}],
      "power_models": {"DJI": [-1.526, 3.934, 0.968, 18.125, 96.613, -1.085, 0.22, 1.332, 433.9]}
    }

Platform mass may be given as ``mass_g`` or ``mass_kg``; ``total_s`` is optional and,
when present, must agree with latency + 1/throughput within 1%. Optional
``board_g``/``heatsink_g`` are kept as metadata only.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dynamics import ComputePlatform, DroneBody, PowerModelParams

CATALOG_ENV = "MAVCODESIGN_CATALOG"
TOTAL_TOLERANCE = 0.01


class CatalogError(ValueError):
    pass


_BUILTIN_ROWS = (
    # name, latency s, throughput Hz, TDP W, board g, heat sink g, declared total s
    ("i9-9940X", 0.243, 13.3, 165.0, 506, 603, 0.318),
    ("i7-4790K", 0.426, 4.46, 88.0, 483, 285, 0.65),
    ("Jetson Xavier", 0.586, 3.25, 30.0, 280, 100, 0.894),
    ("Jetson TX2", 0.717, 2.49, 15.0, 85, 59, 1.119),
)


def builtin_platforms() -> list[ComputePlatform]:
    return [
        ComputePlatform(name, lat, thr, tdp, (board + sink) / 1000.0, total)
        for name, lat, thr, tdp, board, sink, total in _BUILTIN_ROWS
    ]


def validate_platform(p: ComputePlatform, declared_total_s: float | None = None) -> None:
    """Raise CatalogError naming the failed rule; return None when the platform is valid."""
    for attr in ("sa_latency_s", "sa_throughput_hz", "tdp_w", "mass_kg"):
        v = getattr(p, attr)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise CatalogError(f"platform {p.name!r}: {attr} must be positive, got {v!r}")
    if declared_total_s is None:
        declared_total_s = p.declared_total_s
    if declared_total_s is not None:
        if not declared_total_s > 0:
            raise CatalogError(f"platform {p.name!r}: total_s must be positive")
        rel = abs(p.response_s - declared_total_s) / declared_total_s
        if rel > TOTAL_TOLERANCE:
            raise CatalogError(
                f"platform {p.name!r}: latency + 1/throughput = {p.response_s:.4f} s "
                f"differs from declared total {declared_total_s} s by {rel:.1%} (> 1%)"
            )


@dataclass
class CatalogFile:
    platforms: list[ComputePlatform] = field(default_factory=list)
    bodies: list[DroneBody] = field(default_factory=list)
    power_models: dict[str, PowerModelParams] = field(default_factory=dict)

    def platform(self, name: str) -> ComputePlatform:
        for p in self.platforms:
            if p.name == name:
                return p
        raise KeyError(f"unknown platform {name!r}; known: {', '.join(self.platform_names())}")

    def body(self, name: str | None = None) -> DroneBody:
        if name is None:
            return self.bodies[0] if self.bodies else DroneBody()
        for b in self.bodies:
            if b.name == name:
                return b
        raise KeyError(f"unknown body {name!r}; known: {', '.join(b.name for b in self.bodies)}")

    def platform_names(self) -> list[str]:
        return [p.name for p in self.platforms]

    def to_dict(self) -> dict:
        return {
            "platforms": [_platform_to_dict(p) for p in self.platforms],
            "bodies": [_body_to_dict(b) for b in self.bodies],
            "power_models": {k: v.to_list() for k, v in sorted(self.power_models.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _platform_to_dict(p: ComputePlatform) -> dict:
    d = {
        "name": p.name,
        "sa_latency_s": p.sa_latency_s,
        "sa_throughput_hz": p.sa_throughput_hz,
        "tdp_w": p.tdp_w,
        "mass_kg": p.mass_kg,
    }
    if p.declared_total_s is not None:
        d["total_s"] = p.declared_total_s
    return d


def _body_to_dict(b: DroneBody) -> dict:
    return {
        "name": b.name,
        "base_mass_kg": b.base_mass_kg,
        "t_max_n": b.t_max_n,
        "sensing_range_m": b.sensing_range_m,
        "width_m": b.width_m,
        "gravity": b.gravity,
    }


def _parse_platform(rec: dict) -> ComputePlatform:
    if "mass_kg" in rec and "mass_g" in rec:
        raise CatalogError(f"platform {rec.get('name')!r}: give mass_kg or mass_g, not both")
    if "mass_kg" in rec:
        mass_kg = rec["mass_kg"]
    elif "mass_g" in rec:
        mass_kg = rec["mass_g"] / 1000.0
    else:
        raise CatalogError(f"platform {rec.get('name')!r}: missing mass_kg/mass_g")
    try:
        return ComputePlatform(
            name=str(rec["name"]),
            sa_latency_s=rec["sa_latency_s"],
            sa_throughput_hz=rec["sa_throughput_hz"],
            tdp_w=rec["tdp_w"],
            mass_kg=mass_kg,
            declared_total_s=rec.get("total_s"),
        )
    except KeyError as exc:
        raise CatalogError(f"platform {rec.get('name')!r}: missing field {exc}") from exc


def _parse_body(rec: dict) -> DroneBody:
    known = {"name", "base_mass_kg", "t_max_n", "sensing_range_m", "width_m", "gravity"}
    extra = set(rec) - known
    if extra:
        raise CatalogError(f"body {rec.get('name')!r}: unknown fields {sorted(extra)}")
    try:
        return DroneBody(**rec)
    except (TypeError, ValueError) as exc:
        raise CatalogError(str(exc)) from exc


def _check_unique(names, what):
    seen = set()
    for n in names:
        if n in seen:
            raise CatalogError(f"duplicate {what} name {n!r}")
        seen.add(n)


def parse_catalog(doc: dict) -> CatalogFile:
    if not isinstance(doc, dict):
        raise CatalogError("catalog root must be a JSON object")
    platforms = [_parse_platform(r) for r in doc.get("platforms", [])]
    bodies = [_parse_body(r) for r in doc.get("bodies", [])]
    models = {}
    for name, coeffs in doc.get("power_models", {}).items():
        try:
            models[name] = PowerModelParams(tuple(coeffs))
        except (TypeError, ValueError) as exc:
            raise CatalogError(f"power model {name!r}: {exc}") from exc
    _check_unique([p.name for p in platforms], "platform")
    _check_unique([b.name for b in bodies], "body")
    for p in platforms:
        validate_platform(p)
    return CatalogFile(platforms, bodies, models)


def loads_catalog(text: str, source: str = "<string>") -> CatalogFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise CatalogError(
            f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}"
        ) from exc
    return parse_catalog(doc)


def load_catalog(path: str | os.PathLike) -> CatalogFile:
    path = Path(path)
    return loads_catalog(path.read_text(encoding="utf-8"), source=str(path))


def builtin_catalog() -> CatalogFile:
    text = resources.files("mavcodesign.data").joinpath("catalog.json").read_text("utf-8")
    return loads_catalog(text, source="builtin catalog.json")


def default_catalog() -> CatalogFile:
    """Catalog from $MAVCODESIGN_CATALOG if set, else the bundled one."""
    env = os.environ.get(CATALOG_ENV)
    return load_catalog(env) if env else builtin_catalog()
