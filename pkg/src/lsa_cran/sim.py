"""Discrete-event driver: incumbents come and go, MVNOs join and leave, and the
controller re-solves the allocation from scratch after every event."""

from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass, field

from . import band
from .allocator import Allocation, MvnoAllocation
from .band import BandPlan
from .protocol import (
    DeadlineViolation,
    EvacuationRecord,
    LsaMessage,
    World,
    evacuation_request,
    handle_evacuation,
    handle_release,
    release_request,
)
from .scenario import EventKind, Scenario, SimEvent, validate


@dataclass(frozen=True)
class SimRecord:
    time: int
    event: str
    active_incumbents: int
    available_mhz: float
    served_mvnos: int
    mvnos: tuple[MvnoAllocation, ...]
    revenue_dynamic: int
    revenue_static: int | None
    served_static: int | None
    churn: int
    evacuations: tuple[EvacuationRecord, ...] = ()


@dataclass
class SimResult:
    records: list[SimRecord]
    messages: list[LsaMessage]
    violations: list[DeadlineViolation] = field(default_factory=list)
    plans: list[BandPlan] = field(default_factory=list)
    # (dynamic, static) allocation in effect after each record
    allocations: list[tuple[Allocation, Allocation | None]] = field(default_factory=list)

    def log_lines(self) -> list[str]:
        return [m.log_line() for m in self.messages]


def _churn(before: Allocation, after: Allocation) -> int:
    """Number of MVNOs whose (antennas, channels) changed."""
    old = {e.mvno_id: (e.antennas, e.channel_indices) for e in before.entries}
    new = {e.mvno_id: (e.antennas, e.channel_indices) for e in after.entries}
    return sum(1 for k in old.keys() | new.keys() if old.get(k, (0, ())) != new.get(k, (0, ())))


def _describe(e: SimEvent | None) -> str:
    if e is None:
        return "init"
    if e.kind is EventKind.INCUMBENT_RETURN:
        return f"{e.kind.value}:{e.target}:{e.urgency.value}"
    return f"{e.kind.value}:{e.target}"


def run(scenario: Scenario) -> SimResult:
    validate(scenario)
    world = World(
        {m.id: m for m in scenario.mvnos},
        scenario.rate_model,
        scenario.limits,
        scenario.cost,
        scenario.protocol,
        scenario.baseline_enabled,
    )
    plan = world.reallocate(scenario.band_plan())
    result = SimResult([], [])

    def record(event, previous, evacs=()):
        static = world.static_allocation
        result.records.append(
            SimRecord(
                time=event.time if event else 0,
                event=_describe(event),
                active_incumbents=len(plan.active_incumbents()),
                available_mhz=band.available_bandwidth(plan) / 1e6,
                served_mvnos=world.allocation.served_count,
                mvnos=world.allocation.entries,
                revenue_dynamic=world.allocation.revenue,
                revenue_static=static.revenue if static else None,
                served_static=static.served_count if static else None,
                churn=_churn(previous, world.allocation),
                evacuations=tuple(evacs),
            )
        )
        result.plans.append(plan)
        result.allocations.append((world.allocation, static))

    record(None, Allocation())

    queue = [(e.time, e.seq, e) for e in scenario.events]
    heapq.heapify(queue)
    while queue:
        _, _, event = heapq.heappop(queue)
        previous = world.allocation
        evacs = []
        if event.kind is EventKind.INCUMBENT_RETURN:
            msg = evacuation_request(event.target, plan, event.time, event.urgency, world.protocol)
            plan, trace, rec = handle_evacuation(msg, plan, world, event.urgency)
            result.messages.extend(trace)
            evacs.append(rec)
            if not rec.compliant:
                result.violations.append(DeadlineViolation(rec))
        elif event.kind is EventKind.INCUMBENT_RELEASE:
            plan, trace = handle_release(release_request(event.target, plan, event.time), plan, world)
            result.messages.extend(trace)
        elif event.kind is EventKind.MVNO_JOIN:
            world.requests[event.target] = event.request
            plan = world.reallocate(plan)
        else:
            del world.requests[event.target]
            plan = world.reallocate(plan)
        record(event, previous, evacs)
    return result


def snapshot_at(records: list[SimRecord], time: int) -> SimRecord:
    """Latest record at or before ``time`` (microseconds)."""
    if time < 0:
        raise ValueError("time must be non-negative")
    i = bisect.bisect_right([r.time for r in records], time)
    return records[max(i - 1, 0)]
