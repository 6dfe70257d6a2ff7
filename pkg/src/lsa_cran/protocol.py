"""Evacuation and release flows between incumbent, LSA Repository, LSA Controller
and the C-RAN operator.

With C-RAN the whole evacuation is enacted at one point, the BBU pool, which
stops sending IQ samples to the RRHs on the reclaimed channels. Each message
hop costs a fixed latency; all times are integer microseconds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import band
from .allocator import (
    Allocation,
    CostModel,
    MvnoRequest,
    SystemLimits,
    allocate_dynamic,
    allocate_static,
)
from .band import BandPlan, ProtocolError
from .rate import RateModelParams

US = 1_000_000

INCUMBENT = "incumbent"
REPOSITORY = "repository"
CONTROLLER = "controller"
CRAN = "cran_operator"
RRHS = "rrhs"
LICENSEE = "licensee"


class MessageKind(enum.Enum):
    EVACUATION_REQUEST = "EvacuationRequest"
    AVAILABILITY_UPDATE = "AvailabilityUpdate"
    RECONFIGURATION_COMMAND = "ReconfigurationCommand"
    LICENSEE_NOTICE = "LicenseeNotice"
    STOP_IQ_TRANSFER = "StopIqTransfer"
    EVACUATION_CONFIRMED = "EvacuationConfirmed"
    BAND_RELEASED = "BandReleased"


class Urgency(enum.Enum):
    GRACEFUL = "graceful"
    URGENT = "urgent"


class DeadlineViolation(ProtocolError):
    def __init__(self, record: "EvacuationRecord"):
        super().__init__(
            f"evacuation for {record.incumbent_id} completed at {record.completed_at}us,"
            f" deadline {record.deadline}us"
        )
        self.record = record


@dataclass(frozen=True)
class LsaMessage:
    kind: MessageKind
    sender: str
    receiver: str
    channel_indices: tuple[int, ...]
    issued_at: int
    deadline: int | None = None

    def __post_init__(self):
        if not self.channel_indices:
            raise ValueError(f"{self.kind.value} without channels")
        if self.deadline is not None and self.deadline < self.issued_at:
            raise ValueError("deadline before issue time")

    def log_line(self) -> str:
        chans = ";".join(str(c) for c in self.channel_indices)
        return f"{self.issued_at},{self.kind.value},{self.sender},{self.receiver},{chans}"


@dataclass(frozen=True)
class EvacuationRecord:
    incumbent_id: str
    requested_at: int
    completed_at: int
    deadline: int
    displaced_mvnos: frozenset[str]
    urgency: Urgency

    @property
    def compliant(self) -> bool:
        return self.completed_at <= self.deadline


@dataclass(frozen=True)
class ProtocolConfig:
    hop_latency_us: int = 10_000
    graceful_deadline_us: int = 30 * US
    urgent_deadline_us: int = 1 * US
    separate_licensee: bool = False

    def deadline_for(self, urgency: Urgency) -> int:
        if urgency is Urgency.URGENT:
            return self.urgent_deadline_us
        return self.graceful_deadline_us


@dataclass
class World:
    """Everything the controller needs to re-run the allocators."""

    requests: dict[str, MvnoRequest]
    params: RateModelParams
    limits: SystemLimits
    cost: CostModel
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    baseline: bool = True
    allocation: Allocation = field(default_factory=Allocation)
    static_allocation: Allocation | None = None

    def reallocate(self, plan: BandPlan) -> BandPlan:
        """Solve from scratch on the plan's non-incumbent channels and apply."""
        plan = band.clear_assignments(plan)
        reqs = list(self.requests.values())
        self.allocation = allocate_dynamic(reqs, plan, self.params, self.limits, self.cost)
        if self.baseline:
            self.static_allocation = allocate_static(
                reqs, plan, self.params, self.limits, self.cost
            )
        for e in self.allocation.served:
            plan = band.assign(plan, e.mvno_id, e.channel_indices)
        return plan


def evacuation_request(
    incumbent_id: str, plan: BandPlan, at: int, urgency: Urgency, config: ProtocolConfig
) -> LsaMessage:
    inc = plan.incumbents[incumbent_id]
    if inc.evacuation_deadline_s is not None:
        allowed = round(inc.evacuation_deadline_s * US)
    else:
        allowed = config.deadline_for(urgency)
    return LsaMessage(
        MessageKind.EVACUATION_REQUEST,
        incumbent_id,
        REPOSITORY,
        tuple(sorted(inc.owned_channels)),
        at,
        at + allowed,
    )


def handle_evacuation(
    request: LsaMessage,
    plan: BandPlan,
    world: World,
    urgency: Urgency = Urgency.GRACEFUL,
) -> tuple[BandPlan, list[LsaMessage], EvacuationRecord]:
    """Run the evacuation flow; returns the updated plan, the trace and the record.

    A missed deadline does not raise: the record's ``compliant`` flag is False
    and callers decide whether to raise :class:`DeadlineViolation`.
    """
    if request.kind is not MessageKind.EVACUATION_REQUEST:
        raise ProtocolError(f"expected EvacuationRequest, got {request.kind.value}")
    inc_id = request.sender
    if inc_id not in plan.incumbents:
        raise ProtocolError(f"unknown incumbent {inc_id!r}")
    if plan.incumbents[inc_id].active:
        raise ProtocolError(f"incumbent {inc_id} is already active")

    lat = world.protocol.hop_latency_us
    chans = request.channel_indices
    t = request.issued_at
    trace = [request]

    def send(kind, sender, receiver):
        nonlocal t
        t += lat
        trace.append(LsaMessage(kind, sender, receiver, chans, t))

    send(MessageKind.AVAILABILITY_UPDATE, REPOSITORY, CONTROLLER)
    plan, displaced = band.reclaim(plan, inc_id)
    plan = world.reallocate(plan)
    send(MessageKind.RECONFIGURATION_COMMAND, CONTROLLER, CRAN)
    if world.protocol.separate_licensee:
        send(MessageKind.LICENSEE_NOTICE, CRAN, LICENSEE)
    send(MessageKind.STOP_IQ_TRANSFER, CRAN, RRHS)
    send(MessageKind.EVACUATION_CONFIRMED, CRAN, inc_id)
    record = EvacuationRecord(
        inc_id,
        request.issued_at,
        t + lat,
        request.deadline,
        frozenset(displaced),
        urgency,
    )
    return plan, trace, record


def release_request(incumbent_id: str, plan: BandPlan, at: int) -> LsaMessage:
    inc = plan.incumbents[incumbent_id]
    return LsaMessage(
        MessageKind.BAND_RELEASED, incumbent_id, REPOSITORY, tuple(sorted(inc.owned_channels)), at
    )


def handle_release(
    request: LsaMessage, plan: BandPlan, world: World
) -> tuple[BandPlan, list[LsaMessage]]:
    if request.kind is not MessageKind.BAND_RELEASED:
        raise ProtocolError(f"expected BandReleased, got {request.kind.value}")
    lat = world.protocol.hop_latency_us
    plan = band.release(plan, request.sender)
    chans = request.channel_indices
    t = request.issued_at
    trace = [request]
    t += lat
    trace.append(LsaMessage(MessageKind.AVAILABILITY_UPDATE, REPOSITORY, CONTROLLER, chans, t))
    plan = world.reallocate(plan)
    t += lat
    trace.append(LsaMessage(MessageKind.RECONFIGURATION_COMMAND, CONTROLLER, CRAN, chans, t))
    return plan, trace


EVACUATION_SHAPE = (
    (MessageKind.EVACUATION_REQUEST, None, REPOSITORY),
    (MessageKind.AVAILABILITY_UPDATE, REPOSITORY, CONTROLLER),
    (MessageKind.RECONFIGURATION_COMMAND, CONTROLLER, CRAN),
    (MessageKind.STOP_IQ_TRANSFER, CRAN, RRHS),
    (MessageKind.EVACUATION_CONFIRMED, CRAN, None),
)


def is_evacuation_trace(trace: list[LsaMessage]) -> bool:
    """True for the five-message evacuation trace in causal order."""
    if len(trace) != len(EVACUATION_SHAPE):
        return False
    inc = trace[0].sender
    for msg, (kind, sender, receiver) in zip(trace, EVACUATION_SHAPE):
        if msg.kind is not kind:
            return False
        if (sender or inc) != msg.sender or (receiver or inc) != msg.receiver:
            return False
    return all(a.issued_at <= b.issued_at for a, b in zip(trace, trace[1:]))
