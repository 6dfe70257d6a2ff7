"""Exit criteria. Each test appends one PASS/FAIL line, printed at session end."""

import random
import time
from dataclasses import replace

import pytest

from lsa_cran import REFERENCE_SCENARIO, load_scenario
from lsa_cran.allocator import (
    CostModel,
    MvnoRequest,
    SystemLimits,
    allocate_dynamic,
    allocate_oracle,
    allocate_static,
    check_allocation,
)
from lsa_cran.band import BandPlan
from lsa_cran.cli import main
from lsa_cran.protocol import MessageKind, ProtocolConfig, Urgency, is_evacuation_trace
from lsa_cran.rate import RateModelParams
from lsa_cran.scenario import EventKind, SimEvent
from lsa_cran.sim import run
from lsa_cran.sweeps import solve_both, sweep_cost_ratio, sweep_incumbents

MBPS = 1_000_000
MHZ = 1_000_000
RESULTS: list[str] = []


def report(name, ok, detail=""):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {name}{': ' + detail if detail else ''}")
    assert ok, detail


@pytest.fixture
def ref():
    return load_scenario(REFERENCE_SCENARIO)


def test_ac1_one_incumbent_anchor(ref):
    t = time.perf_counter()
    rows = sweep_incumbents(ref, 200 * MBPS)
    dyn, sta = solve_both(ref.with_min_rate(200 * MBPS), ("i1",))
    elapsed = time.perf_counter() - t
    dyn_bw = {len(e.channel_indices) * 5 for e in dyn.served}
    sta_bw = {len(e.channel_indices) * 5 for e in sta.served}
    ok = (
        rows[1].served_dynamic == 5
        and rows[1].served_static == 3
        and dyn_bw == {5}
        and sta_bw == {10}
        and elapsed < 1.0
    )
    report(
        "AC1 served MVNOs at one incumbent, 200 Mbps",
        ok,
        f"k=1 dynamic={rows[1].served_dynamic} static={rows[1].served_static}, "
        f"MHz/MVNO dynamic={sorted(dyn_bw)} static={sorted(sta_bw)}, {elapsed:.3f}s",
    )


def test_ac2_eight_mvnos(ref):
    t = time.perf_counter()
    s = replace(ref, mvnos=tuple(MvnoRequest(f"m{k + 1}", 200 * MBPS, ref.price_per_bps) for k in range(8)))
    dyn, _ = solve_both(s, ())
    elapsed = time.perf_counter() - t
    report("AC2 8 MVNOs at 0 incumbents", dyn.served_count == 8 and elapsed < 1.0,
           f"served={dyn.served_count}, {elapsed:.3f}s")


def test_ac3_high_rate_sweep(ref):
    r430 = sweep_incumbents(ref, 430 * MBPS)
    r200 = sweep_incumbents(ref, 200 * MBPS)
    dyn = [r.served_dynamic for r in r430]
    sta = [r.served_static for r in r430]
    ge = all(d >= s for d, s in zip(dyn, sta))
    strict = any(d > s for d, s in zip(dyn, sta))
    wider = (dyn[0] - sta[0]) > (r200[0].served_dynamic - r200[0].served_static)

    # brute force: dynamic directly; static as the dynamic problem pinned to 20 antennas
    s430 = ref.with_min_rate(430 * MBPS)
    pinned = SystemLimits(20, 20, 20)
    oracle_dyn, oracle_sta = [], []
    for k in range(5):
        plan = s430.band_plan(tuple(f"i{j + 1}" for j in range(k)))
        reqs = list(s430.mvnos)
        oracle_dyn.append(allocate_oracle(reqs, plan, s430.rate_model, s430.limits, s430.cost).served_count)
        oracle_sta.append(allocate_oracle(reqs, plan, s430.rate_model, pinned, s430.cost).served_count)
    derived = dyn == oracle_dyn == [5, 5, 4, 2, 0] and sta == oracle_sta == [1, 1, 0, 0, 0]
    report(
        "AC3 served MVNOs vs incumbents, 430 Mbps",
        ge and strict and wider and derived,
        f"430 Mbps dynamic={dyn} static={sta}; oracle dynamic={oracle_dyn} static={oracle_sta}; "
        f"gap@k=0 430={dyn[0] - sta[0]} vs 200={r200[0].served_dynamic - r200[0].served_static}",
    )


RATIO_MIN, RATIO_MAX, STEPS = 4e-4, 100.0, 20


def test_ac4_cost_ratio_sweep(ref):
    t = time.perf_counter()
    rows = sweep_cost_ratio(ref, RATIO_MIN, RATIO_MAX, STEPS)
    a = all(r.revenue_dynamic >= r.revenue_static for r in rows)

    low = rows[0]
    low_scn = replace(ref, cost=CostModel(low.cost_per_antenna, low.cost_per_hz))
    dyn, sta = solve_both(low_scn)
    b = (
        dyn.served_count > 0
        and all(e.antennas == 20 for e in dyn.served)
        and low.revenue_dynamic - low.revenue_static == 0
    )

    c = True
    for k in (2, 3, 7):
        for r in rows:
            base = replace(ref, cost=CostModel(r.cost_per_antenna, r.cost_per_hz))
            scaled = replace(
                base,
                cost=CostModel(k * r.cost_per_antenna, k * r.cost_per_hz),
                mvnos=tuple(replace(m, price_per_bps=k * m.price_per_bps) for m in base.mvnos),
            )
            (d0, s0), (d1, s1) = solve_both(base), solve_both(scaled)
            c &= d0.entries == d1.entries and s0.entries == s1.entries
            c &= d1.revenue == k * d0.revenue and s1.revenue == k * s0.revenue
    elapsed = time.perf_counter() - t
    report(
        "AC4 revenue vs cost ratio",
        a and b and c and elapsed < 5.0,
        f"(a) dyn>=static {a}, (b) low-ratio diff={low.revenue_dynamic - low.revenue_static} "
        f"antennas={sorted({e.antennas for e in dyn.served})} {b}, (c) scaling {c}, {elapsed:.2f}s",
    )


def _random_instance(rng):
    n = rng.randint(0, 6)
    reqs = [
        MvnoRequest(
            f"m{i}",
            rng.randint(10, 600) * MBPS + rng.randint(0, 999_999),
            rng.choice([0, 1, 5, 50, 500, 2000]),
        )
        for i in range(n)
    ]
    n_ch = rng.choice([0, 1, 2, 3, 4, 5, 6, 7, 8, 8, 8])
    blocks = {}
    start = 0
    while start < n_ch and rng.random() < 0.6:
        size = rng.randint(1, 2)
        blocks[f"i{start}"] = tuple(range(start, min(start + size, n_ch)))
        start += size
    active = [i for i in blocks if rng.random() < 0.5]
    plan = BandPlan.build(n_ch, blocks, active)
    params = RateModelParams(rng.randint(5, 15), rng.randint(5, 15))
    lo = rng.randint(1, 40)
    limits = SystemLimits(lo, rng.randint(lo, 120), rng.randint(lo, 40))
    cost = CostModel(rng.choice([0, 1, 10**3, 10**6, 10**7, 10**8, 10**9]), rng.randint(0, 30))
    return reqs, plan, params, limits, cost


def test_ac5_oracle_equivalence():
    rng = random.Random(20141201)
    t = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        reqs, plan, params, limits, cost = _random_instance(rng)
        d = allocate_dynamic(reqs, plan, params, limits, cost)
        o = allocate_oracle(reqs, plan, params, limits, cost)
        check_allocation(d, reqs, plan, limits, cost)
        check_allocation(o, reqs, plan, limits, cost)
        mismatches += d.revenue != o.revenue
    elapsed = time.perf_counter() - t
    report("AC5 oracle equivalence", mismatches == 0 and elapsed < 30.0,
           f"1000 instances, {mismatches} mismatches, {elapsed:.2f}s")


def _timeline(ref, rng):
    hop = rng.choice([1_000, 10_000, 50_000, 200_000])
    cfg = ProtocolConfig(
        hop_latency_us=hop,
        graceful_deadline_us=rng.choice([100_000, 1_000_000, 30_000_000]),
        urgent_deadline_us=rng.choice([20_000, 50_000, 1_000_000]),
    )
    active, events, t = set(), [], 0
    for seq in range(rng.randint(1, 16)):
        t += rng.choice([0, 1, 5_000, 40_000, 1_000_000])
        inc = rng.choice(["i1", "i2", "i3", "i4"])
        if inc in active:
            events.append(SimEvent(t, seq, EventKind.INCUMBENT_RELEASE, inc))
            active.discard(inc)
        else:
            events.append(SimEvent(t, seq, EventKind.INCUMBENT_RETURN, inc, rng.choice(list(Urgency))))
            active.add(inc)
    n = rng.randint(1, 8)
    mvnos = tuple(MvnoRequest(f"m{k}", rng.choice([100, 200, 430]) * MBPS, 1000) for k in range(n))
    return replace(ref, protocol=cfg, events=tuple(events), mvnos=mvnos)


def test_ac6_evacuation_safety(ref):
    rng = random.Random(42)
    t = time.perf_counter()
    problems = []
    evacuations = violations = 0
    for _ in range(100):
        scn = _timeline(ref, rng)
        result = run(scn)
        # split the log into per-event traces
        traces, cur = [], []
        for m in result.messages:
            if m.kind in (MessageKind.EVACUATION_REQUEST, MessageKind.BAND_RELEASED) and cur:
                traces.append(cur)
                cur = []
            cur.append(m)
        if cur:
            traces.append(cur)
        evac_traces = [tr for tr in traces if tr[0].kind is MessageKind.EVACUATION_REQUEST]
        if not all(is_evacuation_trace(tr) for tr in evac_traces):
            problems.append("trace shape")
        for rec, plan in zip(result.records, result.plans):
            for ev in rec.evacuations:
                evacuations += 1
                reclaimed = plan.incumbents[ev.incumbent_id].owned_channels
                if any(set(e.channel_indices) & reclaimed for e in rec.mvnos):
                    problems.append(f"{ev.incumbent_id} channel still allocated")
                limit = (scn.protocol.urgent_deadline_us if ev.urgency is Urgency.URGENT
                         else scn.protocol.graceful_deadline_us)
                expected = 5 * scn.protocol.hop_latency_us <= limit
                if ev.compliant != expected:
                    problems.append("misclassified deadline")
                violations += not ev.compliant
            held = {c for i in plan.incumbents.values() if i.active for c in i.owned_channels}
            if any(set(e.channel_indices) & held for e in rec.mvnos):
                problems.append("allocation on incumbent channel")
        if len(result.violations) != sum(not ev.compliant for r in result.records for ev in r.evacuations):
            problems.append("violation log mismatch")
    elapsed = time.perf_counter() - t
    report(
        "AC6 evacuation safety",
        not problems and elapsed < 10.0 and 0 < violations < evacuations,
        f"100 timelines, {evacuations} evacuations, {violations} deadline violations, "
        f"{len(problems)} problems, {elapsed:.2f}s",
    )


def test_ac7_determinism(tmp_path, ref):
    src = str(REFERENCE_SCENARIO)
    commands = {
        "run": ["run", src],
        "inc": ["sweep-incumbents", src],
        "inc430": ["sweep-incumbents", src, "--min-rate", "430000000"],
        "cost": ["sweep-cost-ratio", src, "--min", str(RATIO_MIN), "--max", str(RATIO_MAX),
                 "--steps", str(STEPS)],
    }
    same = True
    for name, cmd in commands.items():
        outs = []
        for rep in range(2):
            out, log = tmp_path / f"{name}{rep}.csv", tmp_path / f"{name}{rep}.log"
            extra = ["--log", str(log)] if name == "run" else []
            assert main(cmd + ["--out", str(out)] + extra) == 0
            outs.append((out.read_bytes(), log.read_bytes() if extra else b""))
        same &= outs[0] == outs[1]

    from lsa_cran.scenario import emit_scenario
    rng = random.Random(9)
    for k in range(5):
        path = tmp_path / f"rand{k}.toml"
        path.write_text(emit_scenario(_timeline(ref, rng)))
        outs = []
        for rep in range(2):
            out, log = tmp_path / f"r{k}_{rep}.csv", tmp_path / f"r{k}_{rep}.log"
            assert main(["run", str(path), "--out", str(out), "--log", str(log)]) == 0
            outs.append((out.read_bytes(), log.read_bytes()))
        same &= outs[0] == outs[1]
    report("AC7 determinism", same, "CSV and message logs byte-identical across reruns")
