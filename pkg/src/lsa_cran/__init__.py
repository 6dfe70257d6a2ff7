"""LSA spectrum sharing over a shared, dynamic C-RAN: band model, rate model,
revenue-maximising allocator, LSA evacuation protocol and event simulator."""

from .allocator import (
    Allocation,
    CostModel,
    MvnoRequest,
    SystemLimits,
    allocate_dynamic,
    allocate_oracle,
    allocate_static,
    per_mvno_options,
)
from .band import BandPlan, ProtocolError, available_bandwidth, reclaim, release
from .rate import RateModelParams, min_antennas, rate
from .scenario import REFERENCE_SCENARIO, Scenario, load_scenario, parse_scenario

__all__ = [
    "Allocation",
    "BandPlan",
    "CostModel",
    "MvnoRequest",
    "ProtocolError",
    "REFERENCE_SCENARIO",
    "RateModelParams",
    "Scenario",
    "SystemLimits",
    "allocate_dynamic",
    "allocate_oracle",
    "allocate_static",
    "available_bandwidth",
    "load_scenario",
    "min_antennas",
    "parse_scenario",
    "per_mvno_options",
    "rate",
    "reclaim",
    "release",
]
