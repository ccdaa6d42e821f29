"""Artifact directory layout for a scenario run.

    config.json         scenario as loaded plus the resolved solver constants
    snapshots/*.csv     profiles at the requested times and at T
    events.jsonl        one event record per line
    functionals.csv     TV, Q, Upsilon and TV^- over time
    measures/*.csv      atoms of every balance measure
    reports/*.json      analysis reports and a summary with the checks
"""

from __future__ import annotations

import csv
import json
from dataclasses import replace
from pathlib import Path

from .bv import write_profile_csv

__all__ = ["write_artifacts", "write_json"]


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, default=_default)
        fh.write("\n")


def _default(o):
    if hasattr(o, "item"):
        return o.item()
    if isinstance(o, (set, frozenset, tuple)):
        return sorted(o) if isinstance(o, (set, frozenset)) else list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _snapshot_name(t: float) -> str:
    return f"t_{t:.6f}.csv"


def write_artifacts(result, out_dir) -> Path:
    """Write the run, its measures and its reports below ``out_dir``."""
    out = Path(out_dir)
    for sub in ("snapshots", "measures", "reports"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    art, fam, sc = result.run, result.family, result.scenario

    write_json(out / "config.json", {"scenario": sc.raw, "resolved": art.config.echo()})

    times = sorted(set(art.snapshots) | {art.T})
    for t in times:
        prof = art.snapshots[t] if t in art.snapshots else art.profile_at(t)
        write_profile_csv(prof, out / "snapshots" / _snapshot_name(t))

    with open(out / "events.jsonl", "w") as fh:
        for rec in art.log.records:
            involved = any(fam.is_traced(f) for f in rec.in_ids + rec.out_ids)
            fh.write(replace(rec, beta_involved=involved).to_json() + "\n")

    with open(out / "functionals.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "tv", "q", "upsilon", "tv_neg", "kind"])
        for e in art.trace:
            w.writerow([repr(e.t), repr(e.tv), repr(e.q), repr(e.upsilon), repr(e.tv_neg), e.kind])

    if result.measures is not None:
        for name, m in result.measures.items():
            m.write_csv(out / "measures" / f"{name}.csv")

    for name, rep in result.reports.items():
        write_json(out / "reports" / f"{name}.json", rep)
    if result.regions:
        with open(out / "reports" / "characteristics.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["region", "interval", "side", "t", "x"])
            for k, reg in enumerate(result.regions[:20]):
                for i, (a, b) in enumerate(reg.bounds):
                    for side, curve in (("a", a), ("b", b)):
                        for t, x in curve.samples:
                            w.writerow([k, i, side, repr(t), repr(x)])
    write_json(out / "reports" / "summary.json",
               {"scenario": sc.name, "checks": result.checks, "pass": result.passed})
    return out
