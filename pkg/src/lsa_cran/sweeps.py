"""Experiment sweeps: served MVNOs vs. returning incumbents, and revenue vs.
spectrum-to-antenna cost ratio."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .allocator import Allocation, CostModel, allocate_dynamic, allocate_static
from .scenario import Scenario

MHZ = 1_000_000


@dataclass(frozen=True)
class IncumbentRow:
    k: int
    served_dynamic: int
    served_static: int
    revenue_dynamic: int
    revenue_static: int


@dataclass(frozen=True)
class CostRatioRow:
    ratio: float
    cost_per_antenna: int
    cost_per_hz: int
    served_dynamic: int
    served_static: int
    revenue_dynamic: int
    revenue_static: int


def solve_both(scenario: Scenario, active: tuple[str, ...] | None = None) -> tuple[Allocation, Allocation]:
    """Dynamic and static allocations for the scenario's MVNOs on one band state."""
    plan = scenario.band_plan(active)
    reqs = list(scenario.mvnos)
    args = (plan, scenario.rate_model, scenario.limits, scenario.cost)
    return allocate_dynamic(reqs, *args), allocate_static(reqs, *args)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, so rows stay in grid order
        return list(pool.map(fn, items))


def _incumbent_point(job) -> IncumbentRow:
    scenario, k = job
    active = tuple(i.id for i in scenario.incumbents[:k])
    dyn, sta = solve_both(scenario, active)
    return IncumbentRow(k, dyn.served_count, sta.served_count, dyn.revenue, sta.revenue)


def sweep_incumbents(
    scenario: Scenario, min_rate_override: int | None = None, workers: int = 1
) -> list[IncumbentRow]:
    """For k = 0..#incumbents, activate the first k incumbents and solve both systems."""
    if min_rate_override is not None:
        scenario = scenario.with_min_rate(min_rate_override)
    jobs = [(scenario, k) for k in range(len(scenario.incumbents) + 1)]
    return _map(_incumbent_point, jobs, workers)


def antenna_cost_for_ratio(cost_per_hz: int, ratio: float) -> int:
    """Antenna cost (micro-units) making one MHz cost ``ratio`` antennas' worth."""
    return round(Fraction(cost_per_hz * MHZ) / Fraction(ratio))


def ratio_grid(ratio_min: float, ratio_max: float, steps: int) -> list[float]:
    if ratio_min <= 0 or ratio_max < ratio_min:
        raise ValueError("need 0 < ratio_min <= ratio_max")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    return [float(r) for r in np.geomspace(ratio_min, ratio_max, steps)]


def _cost_point(job) -> CostRatioRow:
    scenario, ratio = job
    hz = scenario.cost.cost_per_hz
    cost = CostModel(antenna_cost_for_ratio(hz, ratio), hz)
    dyn, sta = solve_both(replace(scenario, cost=cost))
    return CostRatioRow(
        ratio, cost.cost_per_antenna, hz, dyn.served_count, sta.served_count, dyn.revenue, sta.revenue
    )


def sweep_cost_ratio(
    scenario: Scenario, ratio_min: float, ratio_max: float, steps: int, workers: int = 1
) -> list[CostRatioRow]:
    """Hold the spectrum cost fixed and vary the antenna cost over a log grid.

    The ratio is the cost of one MHz over the cost of one antenna.
    """
    if scenario.cost.cost_per_hz <= 0:
        raise ValueError("cost ratio sweep needs a positive cost_per_hz")
    jobs = [(scenario, r) for r in ratio_grid(ratio_min, ratio_max, steps)]
    return _map(_cost_point, jobs, workers)


def to_csv(rows, header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        values = [getattr(row, h) for h in header]
        w.writerow([repr(v) if isinstance(v, float) else v for v in values])
    return buf.getvalue()


INCUMBENT_HEADER = ["k", "served_dynamic", "served_static", "revenue_dynamic", "revenue_static"]
COST_RATIO_HEADER = [
    "ratio",
    "cost_per_antenna",
    "cost_per_hz",
    "served_dynamic",
    "served_static",
    "revenue_dynamic",
    "revenue_static",
]
