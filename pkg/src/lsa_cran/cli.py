"""Command line entry point.

Exit codes: 0 success, 2 usage error, 3 scenario could not be parsed or
validated, 4 failure while simulating or sweeping.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from .band import available_bandwidth
from .scenario import ScenarioError, load_scenario
from .sim import run
from .sweeps import (
    COST_RATIO_HEADER,
    INCUMBENT_HEADER,
    sweep_cost_ratio,
    sweep_incumbents,
    to_csv,
)

EXIT_PARSE = 3
EXIT_RUNTIME = 4

RUN_HEADER = [
    "time_us",
    "event",
    "active_incumbents",
    "available_hz",
    "served_dynamic",
    "served_static",
    "revenue_dynamic",
    "revenue_static",
    "churn",
    "deadline_violations",
    "assignments",
]

log = logging.getLogger("lsa_cran")


def run_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_HEADER)
    for r, plan in zip(result.records, result.plans):
        free_hz = available_bandwidth(plan)
        assignments = " ".join(
            f"{e.mvno_id}:{e.antennas}:{'+'.join(map(str, e.channel_indices))}:{e.achieved_rate_bps}"
            for e in r.mvnos
            if e.served
        )
        w.writerow(
            [
                r.time,
                r.event,
                r.active_incumbents,
                free_hz,
                r.served_mvnos,
                "" if r.served_static is None else r.served_static,
                r.revenue_dynamic,
                "" if r.revenue_static is None else r.revenue_static,
                r.churn,
                sum(1 for ev in r.evacuations if not ev.compliant),
                assignments,
            ]
        )
    return buf.getvalue()


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsa-cran", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("scenario")
        sp.add_argument("--out", help="output file (default: stdout)")

    sp = sub.add_parser("validate", help="parse and validate a scenario")
    common(sp)

    sp = sub.add_parser("run", help="simulate the scenario's event timeline")
    common(sp)
    sp.add_argument("--log", help="write the LSA message trace here")

    sp = sub.add_parser("sweep-incumbents", help="served MVNOs vs. active incumbents")
    common(sp)
    sp.add_argument("--min-rate", type=int, help="override every MVNO's min rate (bps)")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("sweep-cost-ratio", help="revenue vs. spectrum-to-antenna cost ratio")
    common(sp)
    sp.add_argument("--min", dest="ratio_min", type=float, required=True)
    sp.add_argument("--max", dest="ratio_max", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        if args.command == "validate":
            _write(
                f"ok: {scenario.n_channels} channels, {len(scenario.incumbents)} incumbents,"
                f" {len(scenario.mvnos)} MVNOs, {len(scenario.events)} events\n",
                args.out,
            )
        elif args.command == "run":
            result = run(scenario)
            for v in result.violations:
                log.warning("deadline violation: %s", v)
            _write(run_csv(result), args.out)
            if args.log:
                Path(args.log).write_text("".join(line + "\n" for line in result.log_lines()))
        elif args.command == "sweep-incumbents":
            rows = sweep_incumbents(scenario, args.min_rate, args.workers)
            _write(to_csv(rows, INCUMBENT_HEADER), args.out)
        else:
            rows = sweep_cost_ratio(
                scenario, args.ratio_min, args.ratio_max, args.steps, args.workers
            )
            _write(to_csv(rows, COST_RATIO_HEADER), args.out)
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error [runtime]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
