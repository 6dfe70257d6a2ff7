"""LSA spectrum pool: 5 MHz channels, incumbent blocks and per-channel occupancy.

A :class:`BandPlan` is what the LSA Repository knows about the band at a given
instant. Plans are treated as values: every mutating operation returns a new
plan, so the simulator can keep snapshots without copying by hand.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

CHANNEL_WIDTH_HZ = 5_000_000


class ProtocolError(Exception):
    """Operation not allowed in the current incumbent state."""


class Occupancy(enum.Enum):
    FREE = "free"
    INCUMBENT = "incumbent"
    ASSIGNED = "assigned"


@dataclass(frozen=True)
class ChannelState:
    kind: Occupancy
    holder: str | None = None

    def __post_init__(self):
        if (self.kind is Occupancy.FREE) != (self.holder is None):
            raise ValueError(f"bad channel state {self.kind} / {self.holder!r}")


FREE = ChannelState(Occupancy.FREE)


@dataclass(frozen=True)
class Channel:
    index: int
    width_hz: int = CHANNEL_WIDTH_HZ


@dataclass(frozen=True)
class Incumbent:
    id: str
    owned_channels: frozenset[int]
    active: bool = False
    evacuation_deadline_s: float | None = None


@dataclass(frozen=True)
class BandPlan:
    channels: tuple[Channel, ...]
    incumbents: Mapping[str, Incumbent]
    occupancy: tuple[ChannelState, ...] = field(default=())

    def __post_init__(self):
        if not self.occupancy:
            object.__setattr__(self, "occupancy", tuple(FREE for _ in self.channels))
        self.check()

    # -- construction ---------------------------------------------------

    @classmethod
    def build(
        cls,
        n_channels: int,
        blocks: Mapping[str, Iterable[int]],
        active: Iterable[str] = (),
        width_hz: int = CHANNEL_WIDTH_HZ,
        deadlines: Mapping[str, float] | None = None,
    ) -> "BandPlan":
        channels = tuple(Channel(i, width_hz) for i in range(n_channels))
        deadlines = deadlines or {}
        incumbents = {
            iid: Incumbent(iid, frozenset(chs), evacuation_deadline_s=deadlines.get(iid))
            for iid, chs in blocks.items()
        }
        plan = cls(channels, incumbents)
        for iid in active:
            plan, _ = reclaim(plan, iid)
        return plan

    @classmethod
    def reference(cls) -> "BandPlan":
        """8 channels (40 MHz), four incumbents each holding a 10 MHz block."""
        return cls.build(8, {f"i{k + 1}": (2 * k, 2 * k + 1) for k in range(4)})

    # -- queries ----------------------------------------------------------

    @property
    def width_hz(self) -> int:
        return self.channels[0].width_hz if self.channels else CHANNEL_WIDTH_HZ

    def state(self, index: int) -> ChannelState:
        return self.occupancy[index]

    def free_channels(self) -> list[int]:
        return [i for i, s in enumerate(self.occupancy) if s.kind is Occupancy.FREE]

    def assigned_to(self, mvno_id: str) -> list[int]:
        return [
            i for i, s in enumerate(self.occupancy)
            if s.kind is Occupancy.ASSIGNED and s.holder == mvno_id
        ]

    def assignments(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for i, s in enumerate(self.occupancy):
            if s.kind is Occupancy.ASSIGNED:
                out.setdefault(s.holder, []).append(i)
        return out

    def active_incumbents(self) -> list[str]:
        return sorted(i.id for i in self.incumbents.values() if i.active)

    def check(self) -> None:
        """Raise ValueError if any structural invariant is broken."""
        if len(self.occupancy) != len(self.channels):
            raise ValueError("occupancy length does not match channel count")
        for pos, ch in enumerate(self.channels):
            if ch.index != pos:
                raise ValueError("channel indices must be contiguous from 0")
            if ch.width_hz != self.width_hz:
                raise ValueError("all channels must have the same width")
        seen: set[int] = set()
        for inc in self.incumbents.values():
            if inc.owned_channels & seen:
                raise ValueError(f"incumbent {inc.id} overlaps another block")
            if any(c < 0 or c >= len(self.channels) for c in inc.owned_channels):
                raise ValueError(f"incumbent {inc.id} block outside the band")
            seen |= inc.owned_channels
        for i, s in enumerate(self.occupancy):
            owner = next((inc for inc in self.incumbents.values() if i in inc.owned_channels), None)
            if s.kind is Occupancy.INCUMBENT:
                if owner is None or owner.id != s.holder or not owner.active:
                    raise ValueError(f"channel {i} held by inactive or foreign incumbent")
            elif owner is not None and owner.active:
                raise ValueError(f"channel {i} of active incumbent {owner.id} is not held")


def available_bandwidth(plan: BandPlan) -> int:
    """Bandwidth in Hz of every channel not held by an incumbent."""
    return plan.width_hz * sum(1 for s in plan.occupancy if s.kind is not Occupancy.INCUMBENT)


def _incumbent(plan: BandPlan, incumbent: str | Incumbent) -> Incumbent:
    iid = incumbent.id if isinstance(incumbent, Incumbent) else incumbent
    try:
        return plan.incumbents[iid]
    except KeyError:
        raise ProtocolError(f"unknown incumbent {iid!r}") from None


def _with_incumbent(plan: BandPlan, inc: Incumbent, occupancy: list[ChannelState]) -> BandPlan:
    incumbents = dict(plan.incumbents)
    incumbents[inc.id] = inc
    return BandPlan(plan.channels, incumbents, tuple(occupancy))


def reclaim(plan: BandPlan, incumbent: str | Incumbent) -> tuple[BandPlan, set[str]]:
    """Hand an incumbent's block back to it; return the new plan and displaced MVNOs."""
    inc = _incumbent(plan, incumbent)
    if inc.active:
        raise ProtocolError(f"incumbent {inc.id} is already active")
    occupancy = list(plan.occupancy)
    displaced: set[str] = set()
    for c in inc.owned_channels:
        if occupancy[c].kind is Occupancy.ASSIGNED:
            displaced.add(occupancy[c].holder)
        occupancy[c] = ChannelState(Occupancy.INCUMBENT, inc.id)
    return _with_incumbent(plan, replace(inc, active=True), occupancy), displaced


def release(plan: BandPlan, incumbent: str | Incumbent) -> BandPlan:
    inc = _incumbent(plan, incumbent)
    if not inc.active:
        raise ProtocolError(f"incumbent {inc.id} is not active")
    occupancy = list(plan.occupancy)
    for c in inc.owned_channels:
        occupancy[c] = FREE
    return _with_incumbent(plan, replace(inc, active=False), occupancy)


def assign(plan: BandPlan, mvno_id: str, channels: Iterable[int]) -> BandPlan:
    occupancy = list(plan.occupancy)
    for c in channels:
        if occupancy[c].kind is not Occupancy.FREE:
            raise ValueError(f"channel {c} is not free ({occupancy[c].kind.value})")
        occupancy[c] = ChannelState(Occupancy.ASSIGNED, mvno_id)
    return BandPlan(plan.channels, plan.incumbents, tuple(occupancy))


def clear_assignments(plan: BandPlan) -> BandPlan:
    occupancy = tuple(FREE if s.kind is Occupancy.ASSIGNED else s for s in plan.occupancy)
    return BandPlan(plan.channels, plan.incumbents, occupancy)
