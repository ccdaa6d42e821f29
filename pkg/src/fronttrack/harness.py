"""Run a scenario with its requested analyses, and refinement sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis.characteristics import random_regions, region_balance
from .analysis.oleinik import exceptional_times, oleinik_two_sided, sample_oleinik
from .analysis.oracles import burgers_riemann_pieces, damped_ramp_window_pieces, l1_to_piecewise_linear
from .bv import total_variation
from .jumps import count_bound_report, enrichment_holds, trace_discontinuities
from .measures import build_measures, split_derivative, verify_measure_bounds
from .scenario import Scenario, scenario_from_dict
from .splitting import RunArtifacts, SolverConfig, run

__all__ = ["ScenarioResult", "analyze", "oracle_error", "run_level", "sweep", "SweepResult"]


def oracle_error(scenario: Scenario, art: RunArtifacts, t: float | None = None) -> float | None:
    """L1 distance on the scenario window between the run and its exact solution."""
    if scenario.oracle is None:
        return None
    t = art.T if t is None else t
    a, b = art.config.window
    prof = art.profile_at(t)
    if scenario.oracle == "burgers_riemann":
        d = scenario.level_datum(art.config)
        if len(d.breakpoints) != 1 or d.breakpoints[0] != 0.0:
            raise ValueError("the Riemann oracle needs a single jump at the origin")
        pieces = burgers_riemann_pieces(d.values[0], d.values[1], t, a, b)
    elif scenario.oracle == "damped_ramp":
        pieces = damped_ramp_window_pieces(t, a, b)
    else:
        raise ValueError(f"unknown oracle {scenario.oracle!r}")
    return l1_to_piecewise_linear(prof, pieces)


@dataclass
class ScenarioResult:
    scenario: Scenario
    run: RunArtifacts
    family: object
    measures: object
    reports: dict[str, dict] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    regions: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def analyze(scenario: Scenario, seed: int | None = None, strict: bool = False) -> ScenarioResult:
    """One run of ``scenario.config`` plus every analysis the scenario asks for."""
    cfg = scenario.config
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    art = run(cfg, scenario.datum)
    an = scenario.analyses
    fam = trace_discontinuities(art.log, art, cfg.beta)
    res = ScenarioResult(scenario, art, fam, None)

    ups = [e.upsilon for e in art.trace]
    res.reports["run"] = {
        "records": len(art.log.records),
        "collisions": len(art.log.collisions()),
        "final_tv": total_variation(art.final_state.profile(art.T)),
        "final_upsilon": ups[-1],
        "growth_bound": cfg.growth_bound,
        "G": cfg.G,
        "update_checks": [{"t": u.t, "tv_before": u.tv_before, "tv_after": u.tv_after,
                           "bound": u.bound, "pass": u.passed} for u in art.update_checks],
    }
    res.checks["update_tv_growth"] = all(u.passed for u in art.update_checks)
    res.checks["upsilon_bound"] = ups[-1] <= cfg.growth_bound * (1 + 1e-9)

    err = oracle_error(scenario, art)
    if err is not None:
        res.reports["oracle"] = {"oracle": scenario.oracle, "t": art.T, "l1_error": err,
                                 "epsilon": cfg.epsilon, "tau": cfg.tau,
                                 "ratio": err / (cfg.epsilon + cfg.tau)}

    if an.get("jumps", True):
        cb = count_bound_report(fam, cfg, total_variation(scenario.datum))
        coarse = trace_discontinuities(art.log, art, 2.0 * cfg.beta)
        enr = enrichment_holds(coarse, fam)
        res.reports["jumps"] = {"beta": cfg.beta, "count": cb.to_dict(), "enrichment": enr,
                                "curves": [c.to_dict() for c in fam.curves]}
        res.checks["jump_count"] = cb.passed
        res.checks["enrichment"] = enr

    needs_measures = an.get("measures", True) or "balances" in an or "oleinik" in an
    if needs_measures:
        res.measures = build_measures(art, fam)
    if an.get("measures", True):
        br = verify_measure_bounds(res.measures, art, fam, strict=strict)
        res.reports["measures"] = {"entries": {k: v.to_dict() for k, v in br.entries.items()},
                                   "constants": br.constants, "pass": br.passed}
        res.checks["measure_bounds"] = br.passed

    if "balances" in an:
        spec = an["balances"]
        n = int(spec.get("regions", 200))
        xr = tuple(spec.get("x_range", cfg.window))
        res.regions = random_regions(art, n, rng, xr)
        reps = [region_balance(art, r, fam, res.measures, strict=strict) for r in res.regions]
        fails = {}
        for rep in reps:
            for k, e in rep.entries.items():
                if not e["pass"]:
                    fails[k] = fails.get(k, 0) + 1
        phi = max((r.phi_jump for r in reps), default=0.0)
        res.reports["balances"] = {
            "regions": n, "failures": fails, "max_phi_jump": phi,
            "min_slack": {k: min(r.entries[k]["slack"] for r in reps) for k in reps[0].entries}
            if reps else {},
            "boundary_ok": all(r.boundary_ok for r in reps),
        }
        res.checks["region_balances"] = all(r.passed for r in reps)

    if "oleinik" in an and cfg.flux.convexity_const > 0:
        spec = an["oleinik"]
        xr = tuple(spec.get("x_range", cfg.window))
        rep = sample_oleinik(art, fam, res.measures, rng, int(spec.get("samples", 100)), xr)
        for item in spec.get("sets", []):
            rep.extend(oleinik_two_sided(art, float(item["t"]), float(item["s"]),
                                         [tuple(b) for b in item["B"]], fam, res.measures))
        d = rep.to_dict()
        d["entries"] = d["entries"][:50]
        res.reports["oleinik"] = d
        res.checks["oleinik"] = rep.passed
    return res


def _level_scenario(raw: dict, base_dir, level: int) -> tuple[Scenario, SolverConfig]:
    sc = scenario_from_dict(raw, None if base_dir is None else Path(base_dir))
    cfg = sc.level_configs()[level]
    return sc, cfg


def run_level(raw: dict, base_dir, level: int, seed: int) -> dict:
    """Summary of one refinement level; module-level so it can run in a worker process."""
    sc, cfg = _level_scenario(raw, base_dir, level)
    art = run(cfg, sc.level_datum(cfg))
    fam = trace_discontinuities(art.log, art, cfg.beta)
    m = build_measures(art, fam)
    out = {"level": level, "epsilon": cfg.epsilon, "tau": cfg.tau, "beta": cfg.beta,
           "records": len(art.log.records), "m_count": fam.m_count,
           "jump_mass": m.mu_jump.mass}
    out["l1_error"] = oracle_error(sc, art)
    if cfg.flux.convexity_const > 0:
        spec = sc.analyses.get("oleinik", {})
        rep = sample_oleinik(art, fam, m, np.random.default_rng(seed),
                             int(spec.get("samples", 100)), tuple(spec.get("x_range", cfg.window)))
        out["oleinik_C"] = rep.C
        out["oleinik_pass"] = rep.passed
    m_atoms = int(math.ceil(cfg.epsilon ** -0.5))
    out["cantor_proxy"] = {repr(t): split_derivative(art, t, fam, m_atoms=m_atoms).cantor_proxy
                           for t in (cfg.snapshot_times or (art.T,))}
    return out


@dataclass
class SweepResult:
    scenario: Scenario
    levels: list[dict]
    observed_order: list[float]
    oleinik_ratios: list[float]
    exceptional: dict | None

    def to_dict(self) -> dict:
        return {"scenario": self.scenario.name, "levels": self.levels,
                "observed_order": self.observed_order, "oleinik_ratios": self.oleinik_ratios,
                "exceptional_times": self.exceptional}

    @property
    def passed(self) -> bool:
        ok = all(lv.get("oleinik_pass", True) for lv in self.levels)
        ok = ok and all(r <= 1.5 for r in self.oleinik_ratios)
        if self.exceptional is not None:
            ok = ok and self.exceptional["trend_ok"]
        return ok


def _ratio(a: float, b: float) -> float:
    if a == 0.0:
        return 1.0 if b == 0.0 else math.inf
    return b / a


def sweep(scenario: Scenario, seed: int | None = None, jobs: int = 1) -> SweepResult:
    """Run every level of the scenario's schedule, in up to ``jobs`` processes."""
    levels_cfg = scenario.level_configs()
    seed = scenario.config.seed if seed is None else seed
    raw = dict(scenario.raw)
    if scenario.sweep is None:
        raw["sweep"] = {"levels": [[scenario.config.epsilon, scenario.config.tau,
                                    scenario.config.beta]]}
    base = None if scenario.base_dir is None else str(scenario.base_dir)
    n = len(levels_cfg)
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, n)) as ex:
            levels = list(ex.map(run_level, [raw] * n, [base] * n, range(n), [seed] * n))
    else:
        levels = [run_level(raw, base, k, seed) for k in range(n)]
    order = []
    for a, b in zip(levels, levels[1:]):
        ea, eb = a["l1_error"], b["l1_error"]
        if ea is None or eb is None or ea <= 1e-13 or eb <= 1e-13:
            continue
        order.append(math.log(ea / eb) / math.log(a["epsilon"] / b["epsilon"]))
    ratios = [_ratio(a["oleinik_C"], b["oleinik_C"])
              for a, b in zip(levels, levels[1:]) if "oleinik_C" in a]
    exc = None
    if scenario.analyses.get("sbv") and n > 1:
        runs = [run(c, scenario.level_datum(c)) for c in levels_cfg]
        exc = exceptional_times(runs, [c.beta for c in levels_cfg],
                                snapshot_times=scenario.config.snapshot_times or None).to_dict()
    return SweepResult(scenario, levels, order, ratios, exc)
