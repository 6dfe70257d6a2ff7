"""Scenario files: TOML in, validated :class:`Scenario` out, and back again.

Errors fall in three categories so the CLI can report them distinctly:
:class:`ScenarioSyntaxError`, :class:`UnknownKeyError` and
:class:`ScenarioInvariantError`. All carry a dotted field path.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from .allocator import CostModel, MvnoRequest, SystemLimits
from .band import CHANNEL_WIDTH_HZ, BandPlan
from .protocol import US, ProtocolConfig, Urgency
from .rate import RateModelParams

REFERENCE_SCENARIO = Path(__file__).with_name("data") / "reference.toml"


class ScenarioError(ValueError):
    category = "scenario"

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ScenarioSyntaxError(ScenarioError):
    category = "syntax"


class UnknownKeyError(ScenarioError):
    category = "unknown-key"


class ScenarioInvariantError(ScenarioError):
    category = "invariant"


class EventKind(enum.Enum):
    INCUMBENT_RETURN = "incumbent_return"
    INCUMBENT_RELEASE = "incumbent_release"
    MVNO_JOIN = "mvno_join"
    MVNO_LEAVE = "mvno_leave"


@dataclass(frozen=True)
class SimEvent:
    time: int  # microseconds
    seq: int
    kind: EventKind
    target: str  # incumbent or MVNO id
    urgency: Urgency = Urgency.GRACEFUL
    request: MvnoRequest | None = None  # MVNO_JOIN only

    @property
    def order(self) -> tuple[int, int]:
        return (self.time, self.seq)


@dataclass(frozen=True)
class IncumbentSpec:
    id: str
    channels: tuple[int, ...]
    active: bool = False
    evacuation_deadline_s: float | None = None


@dataclass(frozen=True)
class Scenario:
    n_channels: int = 8
    channel_width_hz: int = CHANNEL_WIDTH_HZ
    incumbents: tuple[IncumbentSpec, ...] = ()
    rate_model: RateModelParams = field(default_factory=RateModelParams)
    limits: SystemLimits = field(default_factory=SystemLimits)
    cost: CostModel = field(default_factory=lambda: CostModel(0, 0))
    price_per_bps: int = 0
    mvnos: tuple[MvnoRequest, ...] = ()
    events: tuple[SimEvent, ...] = ()
    baseline_enabled: bool = True
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)

    def band_plan(self, active: tuple[str, ...] | None = None) -> BandPlan:
        if active is None:
            active = tuple(i.id for i in self.incumbents if i.active)
        return BandPlan.build(
            self.n_channels,
            {i.id: i.channels for i in self.incumbents},
            active,
            self.channel_width_hz,
            {i.id: i.evacuation_deadline_s for i in self.incumbents if i.evacuation_deadline_s},
        )

    def with_min_rate(self, min_rate_bps: int) -> "Scenario":
        from dataclasses import replace

        mvnos = tuple(replace(m, min_rate_bps=min_rate_bps) for m in self.mvnos)
        return replace(self, mvnos=mvnos)


# -- parsing -----------------------------------------------------------------

_SECTIONS = {
    "band": {"channel_width_hz", "channels", "incumbents"},
    "rate_model": {"m0", "sigma_bps_hz"},
    "limits": {"antennas_min_per_mvno", "antennas_total", "static_antennas_per_mvno"},
    "cost": {"cost_per_antenna", "cost_per_hz"},
    "pricing": {"price_per_bps"},
    "protocol": {
        "hop_latency_us",
        "graceful_deadline_s",
        "urgent_deadline_s",
        "separate_licensee",
    },
    "simulation": {"baseline"},
    "mvnos": {"id", "min_rate_bps", "price_per_bps"},
    "events": {"time_s", "kind", "incumbent", "mvno", "urgency", "min_rate_bps", "price_per_bps"},
}
_INCUMBENT_KEYS = {"id", "channels", "active", "evacuation_deadline_s"}


def _reject_unknown(table: dict, allowed: set[str], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise UnknownKeyError(f"{path}.{key}" if path else key, "unknown key")


def _get(table: dict, key: str, path: str, kind, default=...):
    if key not in table:
        if default is ...:
            raise ScenarioInvariantError(f"{path}.{key}", "missing required key")
        return default
    value = table[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ScenarioInvariantError(f"{path}.{key}", f"expected integer, got {value!r}")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ScenarioInvariantError(f"{path}.{key}", f"expected number, got {value!r}")
    if kind in (str, bool, list) and not isinstance(value, kind):
        raise ScenarioInvariantError(
            f"{path}.{key}", f"expected {kind.__name__}, got {value!r}"
        )
    return value


def _seconds_to_us(value, path: str) -> int:
    us = Decimal(str(value)) * US
    if us != us.to_integral_value():
        raise ScenarioInvariantError(path, "time resolution is one microsecond")
    return int(us)


def _us_to_seconds(us: int):
    return us // US if us % US == 0 else us / US


def _build(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ScenarioError:
        raise
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ScenarioInvariantError(path, str(exc)) from None


def _parse_sigma(value, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ScenarioInvariantError(path, f"expected number or 'p/q', got {value!r}")
    return _build(path, Fraction, str(value))


def parse_scenario(text: str) -> Scenario:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioSyntaxError("", str(exc)) from None
    _reject_unknown(data, set(_SECTIONS), "")
    for name in ("band", "rate_model", "limits", "cost", "pricing", "protocol", "simulation"):
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ScenarioInvariantError(name, "expected a table")
        _reject_unknown(section, _SECTIONS[name], name)

    b = data.get("band", {})
    n_channels = _get(b, "channels", "band", int)
    width = _get(b, "channel_width_hz", "band", int, CHANNEL_WIDTH_HZ)
    if n_channels < 0:
        raise ScenarioInvariantError("band.channels", "must be non-negative")
    if width <= 0:
        raise ScenarioInvariantError("band.channel_width_hz", "must be positive")
    incumbents = []
    seen_channels: dict[int, str] = {}
    for k, inc in enumerate(_get(b, "incumbents", "band", list, [])):
        p = f"band.incumbents[{k}]"
        if not isinstance(inc, dict):
            raise ScenarioInvariantError(p, "expected a table")
        _reject_unknown(inc, _INCUMBENT_KEYS, p)
        iid = _get(inc, "id", p, str)
        chans = _get(inc, "channels", p, list)
        if not chans:
            raise ScenarioInvariantError(f"{p}.channels", "block is empty")
        for c in chans:
            if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c < n_channels:
                raise ScenarioInvariantError(f"{p}.channels", f"channel {c!r} outside the band")
            if c in seen_channels:
                raise ScenarioInvariantError(
                    f"{p}.channels", f"channel {c} already owned by {seen_channels[c]}"
                )
            seen_channels[c] = iid
        if any(i.id == iid for i in incumbents):
            raise ScenarioInvariantError(f"{p}.id", f"duplicate incumbent id {iid!r}")
        deadline = _get(inc, "evacuation_deadline_s", p, float, None)
        if deadline is not None and deadline < 0:
            raise ScenarioInvariantError(f"{p}.evacuation_deadline_s", "must be non-negative")
        incumbents.append(
            IncumbentSpec(iid, tuple(chans), _get(inc, "active", p, bool, False), deadline)
        )

    r = data.get("rate_model", {})
    rate_model = _build(
        "rate_model",
        RateModelParams,
        _get(r, "m0", "rate_model", int, 10),
        _parse_sigma(r.get("sigma_bps_hz", 10), "rate_model.sigma_bps_hz"),
    )
    lim = data.get("limits", {})
    limits = _build(
        "limits",
        SystemLimits,
        _get(lim, "antennas_min_per_mvno", "limits", int, 20),
        _get(lim, "antennas_total", "limits", int, 100),
        _get(lim, "static_antennas_per_mvno", "limits", int, 20),
    )
    c = data.get("cost", {})
    cost = _build(
        "cost",
        CostModel,
        _get(c, "cost_per_antenna", "cost", int, 0),
        _get(c, "cost_per_hz", "cost", int, 0),
    )
    price = _get(data.get("pricing", {}), "price_per_bps", "pricing", int, 0)
    if price < 0:
        raise ScenarioInvariantError("pricing.price_per_bps", "must be non-negative")

    pr = data.get("protocol", {})
    hop = _get(pr, "hop_latency_us", "protocol", int, 10_000)
    if hop < 0:
        raise ScenarioInvariantError("protocol.hop_latency_us", "must be non-negative")
    graceful = _seconds_to_us(
        _get(pr, "graceful_deadline_s", "protocol", float, 30), "protocol.graceful_deadline_s"
    )
    urgent = _seconds_to_us(
        _get(pr, "urgent_deadline_s", "protocol", float, 1), "protocol.urgent_deadline_s"
    )
    if graceful < 0 or urgent < 0:
        raise ScenarioInvariantError("protocol", "deadlines must be non-negative")
    protocol = ProtocolConfig(
        hop, graceful, urgent, _get(pr, "separate_licensee", "protocol", bool, False)
    )
    baseline = _get(data.get("simulation", {}), "baseline", "simulation", bool, True)

    mvnos = []
    for k, m in enumerate(data.get("mvnos", [])):
        p = f"mvnos[{k}]"
        if not isinstance(m, dict):
            raise ScenarioInvariantError(p, "expected a table")
        _reject_unknown(m, _SECTIONS["mvnos"], p)
        req = _mvno(m, p, price)
        if any(x.id == req.id for x in mvnos):
            raise ScenarioInvariantError(f"{p}.id", f"duplicate MVNO id {req.id!r}")
        mvnos.append(req)

    events = []
    for k, e in enumerate(data.get("events", [])):
        p = f"events[{k}]"
        if not isinstance(e, dict):
            raise ScenarioInvariantError(p, "expected a table")
        _reject_unknown(e, _SECTIONS["events"], p)
        events.append(_event(e, p, k, price))

    scenario = Scenario(
        n_channels,
        width,
        tuple(incumbents),
        rate_model,
        limits,
        cost,
        price,
        tuple(mvnos),
        tuple(events),
        baseline,
        protocol,
    )
    validate(scenario)
    return scenario


def _mvno(m: dict, p: str, default_price: int) -> MvnoRequest:
    rate_bps = _get(m, "min_rate_bps", p, int)
    if rate_bps <= 0:
        raise ScenarioInvariantError(f"{p}.min_rate_bps", "must be positive")
    price = _get(m, "price_per_bps", p, int, default_price)
    if price < 0:
        raise ScenarioInvariantError(f"{p}.price_per_bps", "must be non-negative")
    mid = _get(m, "id", p, str) if "id" in m else _get(m, "mvno", p, str)
    return MvnoRequest(mid, rate_bps, price)


def _event(e: dict, p: str, seq: int, default_price: int) -> SimEvent:
    time_s = _get(e, "time_s", p, float)
    if time_s < 0:
        raise ScenarioInvariantError(f"{p}.time_s", "must be non-negative")
    t = _seconds_to_us(time_s, f"{p}.time_s")
    raw = _get(e, "kind", p, str)
    try:
        kind = EventKind(raw)
    except ValueError:
        raise ScenarioInvariantError(f"{p}.kind", f"unknown event kind {raw!r}") from None
    if kind in (EventKind.INCUMBENT_RETURN, EventKind.INCUMBENT_RELEASE):
        allowed = {"time_s", "kind", "incumbent"}
        if kind is EventKind.INCUMBENT_RETURN:
            allowed.add("urgency")
        _reject_unknown(e, allowed, p)
        urgency_raw = _get(e, "urgency", p, str, "graceful")
        try:
            urgency = Urgency(urgency_raw)
        except ValueError:
            raise ScenarioInvariantError(f"{p}.urgency", f"unknown urgency {urgency_raw!r}") from None
        return SimEvent(t, seq, kind, _get(e, "incumbent", p, str), urgency)
    if kind is EventKind.MVNO_JOIN:
        _reject_unknown(e, {"time_s", "kind", "mvno", "min_rate_bps", "price_per_bps"}, p)
        req = _mvno(e, p, default_price)
        return SimEvent(t, seq, kind, req.id, request=req)
    _reject_unknown(e, {"time_s", "kind", "mvno"}, p)
    return SimEvent(t, seq, kind, _get(e, "mvno", p, str))


def validate(scenario: Scenario) -> None:
    """Cross-reference checks; replays the event timeline symbolically."""
    inc_ids = {i.id for i in scenario.incumbents}
    try:
        scenario.band_plan()
    except ValueError as exc:
        raise ScenarioInvariantError("band", str(exc)) from None
    active = {i.id for i in scenario.incumbents if i.active}
    present = {m.id for m in scenario.mvnos}
    seqs = set()
    for e in sorted(scenario.events, key=lambda e: e.order):
        p = f"events[{e.seq}]"
        if e.seq in seqs:
            raise ScenarioInvariantError(p, "duplicate event sequence number")
        seqs.add(e.seq)
        if e.kind in (EventKind.INCUMBENT_RETURN, EventKind.INCUMBENT_RELEASE):
            if e.target not in inc_ids:
                raise ScenarioInvariantError(f"{p}.incumbent", f"unknown incumbent {e.target!r}")
            if e.kind is EventKind.INCUMBENT_RETURN:
                if e.target in active:
                    raise ScenarioInvariantError(p, f"incumbent {e.target} is already active")
                active.add(e.target)
            else:
                if e.target not in active:
                    raise ScenarioInvariantError(p, f"incumbent {e.target} is not active")
                active.discard(e.target)
        elif e.kind is EventKind.MVNO_JOIN:
            if e.target in present:
                raise ScenarioInvariantError(f"{p}.mvno", f"MVNO {e.target!r} already present")
            present.add(e.target)
        else:
            if e.target not in present:
                raise ScenarioInvariantError(f"{p}.mvno", f"MVNO {e.target!r} never joined")
            present.discard(e.target)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


# -- emission ----------------------------------------------------------------


def _sigma_out(sigma: Fraction):
    return sigma.numerator if sigma.denominator == 1 else f"{sigma.numerator}/{sigma.denominator}"


def to_dict(s: Scenario) -> dict[str, Any]:
    incumbents = []
    for i in s.incumbents:
        d: dict[str, Any] = {"id": i.id, "channels": list(i.channels), "active": i.active}
        if i.evacuation_deadline_s is not None:
            d["evacuation_deadline_s"] = i.evacuation_deadline_s
        incumbents.append(d)
    events = []
    for e in s.events:
        d = {"time_s": _us_to_seconds(e.time), "kind": e.kind.value}
        if e.kind is EventKind.INCUMBENT_RETURN:
            d |= {"incumbent": e.target, "urgency": e.urgency.value}
        elif e.kind is EventKind.INCUMBENT_RELEASE:
            d["incumbent"] = e.target
        elif e.kind is EventKind.MVNO_JOIN:
            d |= {
                "mvno": e.target,
                "min_rate_bps": e.request.min_rate_bps,
                "price_per_bps": e.request.price_per_bps,
            }
        else:
            d["mvno"] = e.target
        events.append(d)
    return {
        "band": {
            "channels": s.n_channels,
            "channel_width_hz": s.channel_width_hz,
            "incumbents": incumbents,
        },
        "rate_model": {"m0": s.rate_model.m0, "sigma_bps_hz": _sigma_out(s.rate_model.sigma_bps_hz)},
        "limits": {
            "antennas_min_per_mvno": s.limits.antennas_min_per_mvno,
            "antennas_total": s.limits.antennas_total,
            "static_antennas_per_mvno": s.limits.static_antennas_per_mvno,
        },
        "cost": {"cost_per_antenna": s.cost.cost_per_antenna, "cost_per_hz": s.cost.cost_per_hz},
        "pricing": {"price_per_bps": s.price_per_bps},
        "protocol": {
            "hop_latency_us": s.protocol.hop_latency_us,
            "graceful_deadline_s": _us_to_seconds(s.protocol.graceful_deadline_us),
            "urgent_deadline_s": _us_to_seconds(s.protocol.urgent_deadline_us),
            "separate_licensee": s.protocol.separate_licensee,
        },
        "simulation": {"baseline": s.baseline_enabled},
        "mvnos": [
            {"id": m.id, "min_rate_bps": m.min_rate_bps, "price_per_bps": m.price_per_bps}
            for m in s.mvnos
        ],
        "events": events,
    }


def emit_scenario(s: Scenario) -> str:
    return tomli_w.dumps(to_dict(s))
