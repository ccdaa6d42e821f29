"""Command line: ``fronttrack run|sweep|acceptance``.

Exit codes: 0 when every enabled check passes, 1 when a check fails,
2 for invalid input (scenario, schedule or arguments), 3 when a run aborts.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import BoundViolation, ConfigInvalid, DomainViolation, FrontTrackError, ScheduleViolation
from .export import write_artifacts, write_json
from .scenario import load_scenario

log = logging.getLogger("fronttrack")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RUN = 0, 1, 2, 3


def _times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fronttrack",
                                description="Front tracking for scalar balance laws.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario and write its artifacts")
    r.add_argument("scenario", help="scenario JSON file (or the name of a bundled one)")
    r.add_argument("--out", default=None, help="output directory (default: out/<name>)")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--strict", action="store_true", help="stop at the first failed bound")
    r.add_argument("--snapshot-times", type=_times, default=None, metavar="T1,T2,...")

    s = sub.add_parser("sweep", help="run the scenario's refinement schedule")
    s.add_argument("scenario")
    s.add_argument("--out", default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--strict", action="store_true")

    a = sub.add_parser("acceptance", help="run the acceptance criteria")
    a.add_argument("--only", type=int, nargs="*", default=None, metavar="K")
    a.add_argument("--out", default=None, help="write a JSON summary here")
    return p


def cmd_run(args) -> int:
    from .harness import analyze

    sc = load_scenario(args.scenario).with_overrides(args.seed, args.snapshot_times)
    res = analyze(sc, strict=args.strict)
    out = Path(args.out or Path("out") / sc.name)
    write_artifacts(res, out)
    for name, ok in sorted(res.checks.items()):
        log.info("%-18s %s", name, "ok" if ok else "FAILED")
    if "oracle" in res.reports:
        print(f"l1_error {res.reports['oracle']['l1_error']:.6g}")
    print(f"{sc.name}: {'pass' if res.passed else 'FAIL'} -> {out}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    from .harness import sweep

    sc = load_scenario(args.scenario)
    res = sweep(sc, seed=args.seed, jobs=max(1, args.jobs))
    out = Path(args.out or Path("out") / f"{sc.name}_sweep")
    (out / "reports").mkdir(parents=True, exist_ok=True)
    write_json(out / "reports" / "sweep.json", res.to_dict())
    print("level  epsilon    tau        l1_error     oleinik_C")
    for lv in res.levels:
        err = "-" if lv["l1_error"] is None else f"{lv['l1_error']:.4e}"
        c = lv.get("oleinik_C")
        print(f"{lv['level']:5d}  {lv['epsilon']:<9.4g}  {lv['tau']:<9.4g}  {err:<11}  "
              f"{'-' if c is None else format(c, '.4g')}")
    if res.observed_order:
        print("observed order", " ".join(f"{o:.3f}" for o in res.observed_order))
    if res.exceptional is not None:
        print("flagged times", res.exceptional["flagged"])
    ok = res.passed
    if args.strict and not ok:
        raise BoundViolation("sweep", json.dumps(res.to_dict()["oleinik_ratios"]))
    print(f"{sc.name} sweep: {'pass' if ok else 'FAIL'} -> {out}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_acceptance(args) -> int:
    from .acceptance import CRITERIA, run_criterion

    keys = args.only or sorted(CRITERIA)
    results = [run_criterion(k) for k in keys]
    for r in results:
        print(r.line())
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        write_json(args.out, [{"criterion": r.number, "name": r.name, "pass": r.passed,
                               "detail": r.detail} for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "acceptance": cmd_acceptance}
    try:
        return handlers[args.command](args)
    except (ConfigInvalid, DomainViolation, ScheduleViolation) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BoundViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except FrontTrackError as exc:
        print(f"error: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
