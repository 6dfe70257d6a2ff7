"""Revenue-maximising assignment of antennas and LSA channels to MVNOs.

Three solvers share one objective and one tie-break order:

* :func:`allocate_dynamic` -- antennas come from a shared RRH pool, so every
  MVNO trades spectrum against antennas. Exact multiple-choice knapsack.
* :func:`allocate_static` -- each MVNO owns a fixed-size C-RAN; only the
  bandwidth is chosen.
* :func:`allocate_oracle` -- exhaustive enumeration, used to check the others.

Money is integer micro-units throughout. Income for a served MVNO is its
contracted rate times its price; surplus rate earns nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .band import BandPlan
from .rate import RateModelParams, min_antennas, rate

ORACLE_MAX_MVNOS = 8
ORACLE_MAX_CHANNELS = 8


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class MvnoRequest:
    id: str
    min_rate_bps: int
    price_per_bps: int  # micro-units per bps per epoch

    def __post_init__(self):
        if self.min_rate_bps <= 0:
            raise ValueError(f"{self.id}: min_rate_bps must be positive")
        if self.price_per_bps < 0:
            raise ValueError(f"{self.id}: price_per_bps must be non-negative")

    @property
    def income(self) -> int:
        return self.price_per_bps * self.min_rate_bps


@dataclass(frozen=True)
class CostModel:
    cost_per_antenna: int  # micro-units per antenna per epoch
    cost_per_hz: int  # micro-units per Hz per epoch

    def __post_init__(self):
        if self.cost_per_antenna < 0 or self.cost_per_hz < 0:
            raise ValueError("costs must be non-negative")

    def of(self, antennas: int, bandwidth_hz: int) -> int:
        return self.cost_per_antenna * antennas + self.cost_per_hz * bandwidth_hz


@dataclass(frozen=True)
class SystemLimits:
    antennas_min_per_mvno: int = 20
    antennas_total: int = 100
    static_antennas_per_mvno: int = 20

    def __post_init__(self):
        if not 0 <= self.antennas_min_per_mvno <= self.antennas_total:
            raise ValueError("need 0 <= antennas_min_per_mvno <= antennas_total")
        if self.static_antennas_per_mvno < 0:
            raise ValueError("static_antennas_per_mvno must be non-negative")


@dataclass(frozen=True)
class Option:
    channels: int
    antennas: int
    cost: int


@dataclass(frozen=True)
class MvnoAllocation:
    mvno_id: str
    served: bool = False
    antennas: int = 0
    channel_indices: tuple[int, ...] = ()
    achieved_rate_bps: int = 0


@dataclass(frozen=True)
class Allocation:
    entries: tuple[MvnoAllocation, ...] = ()
    total_income: int = 0
    total_cost: int = 0
    revenue: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "revenue", self.total_income - self.total_cost)

    def __getitem__(self, mvno_id: str) -> MvnoAllocation:
        for e in self.entries:
            if e.mvno_id == mvno_id:
                return e
        raise KeyError(mvno_id)

    @property
    def served(self) -> list[MvnoAllocation]:
        return [e for e in self.entries if e.served]

    @property
    def served_count(self) -> int:
        return len(self.served)

    @property
    def served_ids(self) -> tuple[str, ...]:
        return tuple(e.mvno_id for e in self.served)

    @property
    def total_channels(self) -> int:
        return sum(len(e.channel_indices) for e in self.entries)

    @property
    def total_antennas(self) -> int:
        return sum(e.antennas for e in self.entries)


def per_mvno_options(
    req: MvnoRequest,
    params: RateModelParams,
    limits: SystemLimits,
    cost: CostModel,
    max_bandwidth_hz: int,
    width_hz: int = 5_000_000,
    antennas_range: tuple[int, int] | None = None,
) -> list[Option]:
    """Cheapest feasible antenna count per channel count, Pareto-pruned.

    Options come back sorted by channel count; each one is strictly cheaper
    than every narrower option kept before it.
    """
    if max_bandwidth_hz % width_hz:
        raise ValueError("max_bandwidth must be a multiple of the channel width")
    lo, hi = antennas_range or (limits.antennas_min_per_mvno, limits.antennas_total)
    options: list[Option] = []
    for n in range(1, max_bandwidth_hz // width_hz + 1):
        m = min_antennas(params, n * width_hz, req.min_rate_bps, lo, hi)
        if m is None:
            continue
        c = cost.of(m, n * width_hz)
        if not options or c < options[-1].cost:
            options.append(Option(n, m, c))
    return options


def _static_options(req, params, limits, cost, max_bandwidth_hz, width_hz):
    m = limits.static_antennas_per_mvno
    return per_mvno_options(req, params, limits, cost, max_bandwidth_hz, width_hz, (m, m))


def _solve(
    requests: list[MvnoRequest], options: dict[str, list[Option]], capacity: int
) -> dict[str, Option]:
    """Multiple-choice knapsack over the channel budget.

    best[i][c] is the best key obtainable from requests[i:] with at most c
    channels, where a key is (revenue, served, served-flags, -channels,
    -antennas) compared lexicographically. Served-flags are listed in id
    order, so among equal-size served sets the lexicographically smallest
    id set has the largest flag vector.
    """
    n = len(requests)
    empty = (0, 0, (), 0, 0)
    best = [[empty] * (capacity + 1) for _ in range(n + 1)]
    choice: list[list[Option | None]] = [[None] * (capacity + 1) for _ in range(n)]
    for i in range(n - 1, -1, -1):
        req = requests[i]
        for c in range(capacity + 1):
            r, s, flags, ch, ant = best[i + 1][c]
            top, pick = (r, s, (0,) + flags, ch, ant), None
            for opt in options[req.id]:
                if opt.channels > c:
                    break
                r, s, flags, ch, ant = best[i + 1][c - opt.channels]
                key = (
                    r + req.income - opt.cost,
                    s + 1,
                    (1,) + flags,
                    ch - opt.channels,
                    ant - opt.antennas,
                )
                if key > top:
                    top, pick = key, opt
            best[i][c] = top
            choice[i][c] = pick
    picked: dict[str, Option] = {}
    c = capacity
    for i, req in enumerate(requests):
        opt = choice[i][c]
        if opt is not None:
            picked[req.id] = opt
            c -= opt.channels
    return picked


def build_allocation(
    requests: list[MvnoRequest],
    picked: dict[str, Option],
    plan: BandPlan,
    params: RateModelParams,
    cost: CostModel,
) -> Allocation:
    """Materialise chosen options, handing out lowest free channels in id order."""
    free = iter(plan.free_channels())
    entries = []
    income = total_cost = 0
    for req in sorted(requests, key=lambda r: r.id):
        opt = picked.get(req.id)
        if opt is None:
            entries.append(MvnoAllocation(req.id))
            continue
        chans = tuple(next(free) for _ in range(opt.channels))
        bw = opt.channels * plan.width_hz
        entries.append(
            MvnoAllocation(req.id, True, opt.antennas, chans, rate(params, opt.antennas, bw))
        )
        income += req.income
        total_cost += cost.of(opt.antennas, bw)
    return Allocation(tuple(entries), income, total_cost)


def _check_ids(requests):
    ids = [r.id for r in requests]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate MVNO ids")
    return sorted(requests, key=lambda r: r.id)


def allocate_dynamic(
    requests: list[MvnoRequest],
    plan: BandPlan,
    params: RateModelParams,
    limits: SystemLimits,
    cost: CostModel,
) -> Allocation:
    requests = _check_ids(requests)
    free = len(plan.free_channels())
    width = plan.width_hz
    options = {
        r.id: per_mvno_options(r, params, limits, cost, free * width, width) for r in requests
    }
    return build_allocation(requests, _solve(requests, options, free), plan, params, cost)


def allocate_static(
    requests: list[MvnoRequest],
    plan: BandPlan,
    params: RateModelParams,
    limits: SystemLimits,
    cost: CostModel,
) -> Allocation:
    requests = _check_ids(requests)
    free = len(plan.free_channels())
    width = plan.width_hz
    options = {
        r.id: _static_options(r, params, limits, cost, free * width, width) for r in requests
    }
    return build_allocation(requests, _solve(requests, options, free), plan, params, cost)


def allocate_oracle(
    requests: list[MvnoRequest],
    plan: BandPlan,
    params: RateModelParams,
    limits: SystemLimits,
    cost: CostModel,
) -> Allocation:
    """Brute force over every served subset and every channel count per MVNO.

    No Pareto pruning and no dynamic programming: each MVNO may take any
    1..free channels with the fewest antennas that meet its rate.
    """
    requests = _check_ids(requests)
    free = len(plan.free_channels())
    if len(requests) > ORACLE_MAX_MVNOS or free > ORACLE_MAX_CHANNELS:
        raise InstanceTooLarge(
            f"oracle limited to {ORACLE_MAX_MVNOS} MVNOs and {ORACLE_MAX_CHANNELS} channels"
        )
    width = plan.width_hz
    lo, hi = limits.antennas_min_per_mvno, limits.antennas_total

    # brute-force antenna scan, independent of min_antennas()
    def cheapest(req, n):
        for m in range(lo, hi + 1):
            if rate(params, m, n * width) >= req.min_rate_bps:
                return m
        return None

    choices = []
    for req in requests:
        row = [None]
        for n in range(1, free + 1):
            m = cheapest(req, n)
            if m is not None:
                row.append(Option(n, m, cost.of(m, n * width)))
        choices.append(row)

    best_key, best_pick = None, {}
    combo: list[Option | None] = []

    # depth-first over every per-MVNO choice whose channels still fit
    def visit(i, left):
        nonlocal best_key, best_pick
        if i == len(requests):
            served = [(r, o) for r, o in zip(requests, combo) if o is not None]
            key = (
                sum(r.income - o.cost for r, o in served),
                len(served),
                _Desc(tuple(r.id for r, _ in served)),
                -sum(o.channels for _, o in served),
                -sum(o.antennas for _, o in served),
            )
            if best_key is None or key > best_key:
                best_key, best_pick = key, {r.id: o for r, o in served}
            return
        for o in choices[i]:
            if o is not None and o.channels > left:
                continue
            combo.append(o)
            visit(i + 1, left - (o.channels if o else 0))
            combo.pop()

    visit(0, free)
    return build_allocation(requests, best_pick, plan, params, cost)


class _Desc:
    """Reverses ordering so that smaller tuples compare as larger."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __eq__(self, other):
        return self.v == other.v

    def __gt__(self, other):
        return self.v < other.v

    def __lt__(self, other):
        return self.v > other.v


def check_allocation(
    alloc: Allocation,
    requests: list[MvnoRequest],
    plan: BandPlan,
    limits: SystemLimits,
    cost: CostModel,
    static: bool = False,
) -> None:
    """Assert every output invariant; raises AssertionError on the first breach."""
    by_id = {r.id: r for r in requests}
    free = set(plan.free_channels())
    used: set[int] = set()
    income = spent = 0
    for e in alloc.entries:
        req = by_id[e.mvno_id]
        if not e.served:
            assert e.antennas == 0 and not e.channel_indices and e.achieved_rate_bps == 0, e
            continue
        assert e.achieved_rate_bps >= req.min_rate_bps, e
        if static:
            assert e.antennas == limits.static_antennas_per_mvno, e
        else:
            assert limits.antennas_min_per_mvno <= e.antennas <= limits.antennas_total, e
        chans = set(e.channel_indices)
        assert chans and chans <= free, e
        assert not chans & used, e
        used |= chans
        income += req.income
        spent += cost.of(e.antennas, len(chans) * plan.width_hz)
    assert alloc.total_income == income and alloc.total_cost == spent
    assert alloc.revenue == alloc.total_income - alloc.total_cost
