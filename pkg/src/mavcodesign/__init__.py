"""Analytical and simulated co-design of MAV compute and flight physics."""

from .cig import build_default_mav_graph, classify_cluster, enumerate_impact_paths, validate_acyclic
from .dynamics import (
    AffineHoverPower,
    Battery,
    ComputePlatform,
    DroneBody,
    ParametricPower,
    PowerModelParams,
    max_acceleration,
    total_mass,
)
from .pipeline import PipelineTiming, ResponseProfile, Scheduling, response_profile, v_max_bound

__version__ = "0.1.0"

__all__ = [
    "AffineHoverPower",
    "Battery",
    "ComputePlatform",
    "DroneBody",
    "ParametricPower",
    "PipelineTiming",
    "PowerModelParams",
    "ResponseProfile",
    "Scheduling",
    "build_default_mav_graph",
    "classify_cluster",
    "enumerate_impact_paths",
    "max_acceleration",
    "response_profile",
    "total_mass",
    "v_max_bound",
    "validate_acyclic",
]
