"""The ten acceptance criteria, each as a function returning a CriterionResult."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .analysis.characteristics import random_regions, region_balance
from .analysis.oleinik import exact_rarefaction_entry, exceptional_times, sample_oleinik
from .analysis.oracles import burgers_riemann_pieces, l1_to_piecewise_linear
from .bv import Profile, total_variation
from .harness import oracle_error
from .jumps import count_bound_report, enrichment_holds, trace_discontinuities
from .measures import build_measures, verify_measure_bounds
from .riemann import burgers, solve_riemann
from .scenario import STANDARD_NAMES, standard_scenario
from .splitting import SolverConfig, run
from .tracking import COLLISION, EventLog, FrontState, evolve, init_from_datum

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s)"


@lru_cache(maxsize=None)
def _standard(name: str):
    sc = standard_scenario(name)
    art = run(sc.config, sc.datum)
    fam = trace_discontinuities(art.log, art, sc.config.beta)
    return sc, art, fam, build_measures(art, fam)


def _level_runs(name: str):
    sc = standard_scenario(name)
    out = []
    for cfg in sc.level_configs():
        art = run(cfg, sc.level_datum(cfg))
        out.append((cfg, art))
    return sc, out


def riemann_oracle(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    flux = burgers()
    eps = 0.1
    worst = 0.0
    for _ in range(100):
        ul, ur = (float(v) for v in rng.uniform(-1.0, 1.0, 2))
        fan = solve_riemann(ul, ur, flux, eps)
        prof = FrontState(0.0, fan.fronts, ul).profile(1.0)
        err = l1_to_piecewise_linear(prof, burgers_riemann_pieces(ul, ur, 1.0, -2.0, 2.0))
        worst = max(worst, err / (eps * abs(ur - ul)) if ur != ul else err)
    fan = solve_riemann(0.0, 1.0, flux, 0.5)
    unit = l1_to_piecewise_linear(FrontState(0.0, fan.fronts, 0.0).profile(1.0),
                                  burgers_riemann_pieces(0.0, 1.0, 1.0, -2.0, 2.0))
    dt = time.perf_counter() - t0
    ok = worst <= 1.0 + 1e-12 and abs(unit - 0.125) <= 1e-12 and dt < 1.0
    return CriterionResult(1, "Riemann oracle equivalence", ok,
                           {"worst_error_over_eps_jump": worst, "unit_rarefaction_error": unit,
                            "runtime": dt})


def _random_datum(rng) -> Profile:
    k = int(rng.integers(2, 8))
    xs = np.sort(rng.uniform(-1.0, 1.0, k))
    jumps = rng.uniform(-1.0, 1.0, k)
    jumps *= float(rng.uniform(0.5, 2.0)) / max(np.abs(jumps).sum(), 1e-12)
    vals = np.concatenate([[0.0], np.cumsum(jumps)])
    return Profile(tuple(float(x) for x in xs), tuple(float(v) for v in vals))


def functional_monotonicity(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    flux, eps, kappa, T = burgers(), 0.05, 0.05, 2.0
    viol = {"tv": 0, "upsilon": 0, "drop": 0, "count": 0}
    collisions = 0
    for _ in range(50):
        datum = _random_datum(rng)
        log = EventLog()
        s = init_from_datum(datum, flux, eps, log, tv_bound=2.0)
        u0 = s.readings(kappa).upsilon
        _, recs = evolve(s, T, flux, eps, log, kappa)
        n = 0
        for r in recs:
            if r.type != COLLISION:
                continue
            n += 1
            tol = 1e-12 * max(1.0, r.tv_before)
            if r.tv_after > r.tv_before + tol:
                viol["tv"] += 1
            if r.upsilon_after > r.upsilon_before + tol:
                viol["upsilon"] += 1
            if not r.cancellation:
                sz = [abs(v) for v in r.in_sizes]
                need = kappa * math.fsum(a * b for i, a in enumerate(sz) for b in sz[i + 1:])
                if r.upsilon_drop < need - 1e-12:
                    viol["drop"] += 1
        if n > u0 / (kappa * eps * eps):
            viol["count"] += 1
        collisions += n
    return CriterionResult(2, "Functional monotonicity", not any(viol.values()),
                           {"violations": viol, "collisions": collisions},
                           time.perf_counter() - t0)


def source_growth() -> CriterionResult:
    t0 = time.perf_counter()
    sc, art, _, _ = _standard("damped_ramp")
    bad = [u.t for u in art.update_checks if not u.passed]
    final = art.trace[-1].upsilon
    ok = not bad and final <= sc.config.growth_bound
    return CriterionResult(3, "Source-growth bound", ok,
                           {"failed_updates": bad, "updates": len(art.update_checks),
                            "final_upsilon": final, "bound": sc.config.growth_bound},
                           time.perf_counter() - t0)


def splitting_accuracy() -> CriterionResult:
    t0 = time.perf_counter()
    sc = standard_scenario("damped_ramp")
    cs, errs = [], []
    for eps in (0.1, 0.05, 0.025):
        cfg = replace(sc.config, epsilon=eps, tau=eps)
        art = run(cfg, sc.level_datum(cfg))
        err = oracle_error(sc, art)
        errs.append(err)
        cs.append(err / (eps + eps))
    ok = max(cs) <= 2.0 * min(cs) and min(cs) > 0
    return CriterionResult(4, "Splitting accuracy", ok, {"errors": errs, "C": cs},
                           time.perf_counter() - t0)


def measure_identities() -> CriterionResult:
    t0 = time.perf_counter()
    _, _, _, m = _standard("burgers_shock")
    shock = {k: getattr(m, k).positive_times().mass for k in ("mu", "mu_jump", "xi_jump")}
    sc, art, fam, mm = _standard("merging_shocks")
    merges = [r for r in art.log.collisions() if len(r.in_ids) >= 2
              and all(fam.is_traced(f) for f in r.in_ids)]
    merge_atoms = 0.0
    for r in merges:
        for meas in (mm.mu, mm.mu_jump):
            sel = (meas.t == r.t) & (meas.x == r.x)
            merge_atoms = max(merge_atoms, float(np.abs(meas.w[sel]).sum()))
    # a shock eaten by the steps of a rarefaction behind it
    cfg = SolverConfig(epsilon=0.1, tau=0.01, beta=0.5, kappa=0.05, delta_bar=2.2, T=10.0,
                       flux=burgers(), G_const=0.0)
    art2 = run(cfg, Profile((0.0, 1.0), (0.0, 1.0, 0.0)))
    fam2 = trace_discontinuities(art2.log, art2, cfg.beta)
    mj = build_measures(art2, fam2).mu_jump
    mismatch, cancels = 0.0, 0
    for r in art2.log.collisions():
        if not r.cancellation:
            continue
        cancels += 1
        fr = art2.log.fronts
        q = (math.fsum(fr[f].size for f in r.out_ids if fam2.is_traced(f))
             - math.fsum(fr[f].size for f in r.in_ids if fam2.is_traced(f)))
        sel = (mj.t == r.t) & (mj.x == r.x)
        mismatch = max(mismatch, abs(float(mj.w[sel].sum()) - q))
    ok = all(v == 0.0 for v in shock.values()) and merges and merge_atoms == 0.0 \
        and cancels > 0 and mismatch == 0.0
    return CriterionResult(5, "Measure identities", bool(ok),
                           {"shock_masses": shock, "merges": len(merges), "merge_atom": merge_atoms,
                            "cancellations": cancels, "bookkeeping_mismatch": mismatch},
                           time.perf_counter() - t0)


def measure_mass_bounds() -> CriterionResult:
    t0 = time.perf_counter()
    detail = {}
    ok = True
    for name in STANDARD_NAMES:
        _, art, fam, m = _standard(name)
        rep = verify_measure_bounds(m, art, fam)
        sub = {k: rep.entries[k].passed for k in ("mu_vs_source", "source_strip", "cont_triangle")}
        detail[name] = {k: (rep.entries[k].lhs, rep.entries[k].rhs) for k in sub}
        ok = ok and all(sub.values())
    return CriterionResult(6, "Measure mass bounds", ok, detail, time.perf_counter() - t0)


def jump_count() -> CriterionResult:
    t0 = time.perf_counter()
    detail = {}
    ok = True
    for name in STANDARD_NAMES:
        sc, art, fam, _ = _standard(name)
        cb = count_bound_report(fam, sc.config, total_variation(sc.datum))
        fams = [trace_discontinuities(art.log, art, sc.config.beta * f) for f in (4.0, 2.0, 1.0)]
        enr = all(enrichment_holds(a, b) for a, b in zip(fams, fams[1:]))
        detail[name] = {"m_count": cb.m_count, "bound": cb.bound, "enrichment": enr}
        ok = ok and cb.passed and enr
    return CriterionResult(7, "Jump-count bound", ok, detail, time.perf_counter() - t0)


def region_balances(seed: int = 0, n: int = 200) -> CriterionResult:
    t0 = time.perf_counter()
    names = ("evcont", "evjump", "evcontfp", "evjumpfp", "ultimaf")
    detail = {}
    ok = True
    for name in STANDARD_NAMES:
        sc, art, fam, m = _standard(name)
        rng = np.random.default_rng(seed)
        xr = tuple(sc.analyses.get("balances", {}).get("x_range", sc.config.window))
        fails, phi = 0, -math.inf
        for reg in random_regions(art, n, rng, xr):
            rep = region_balance(art, reg, fam, m)
            if not all(rep.entries[k]["pass"] for k in names):
                fails += 1
            phi = max(phi, rep.phi_jump)
        detail[name] = {"failures": fails, "max_phi_jump": phi}
        ok = ok and fails == 0 and phi <= 1e-9
    return CriterionResult(8, "Region balances", ok, detail, time.perf_counter() - t0)


def oleinik_verifier(seed: int = 0, samples: int = 100) -> CriterionResult:
    t0 = time.perf_counter()
    exact = [exact_rarefaction_entry(t, B).C
             for t, B in ((1.0, [(0.2, 0.7)]), (2.0, [(0.1, 0.5), (1.0, 1.9)]), (0.5, [(0.0, 0.5)]))]
    ok = all(c == 1.0 for c in exact)
    detail = {"exact_rarefaction_C": exact}
    for name in STANDARD_NAMES:
        sc, levels = _level_runs(name)
        xr = tuple(sc.analyses.get("oleinik", {}).get("x_range", sc.config.window))
        Cs, passes = [], []
        for cfg, art in levels:
            fam = trace_discontinuities(art.log, art, cfg.beta)
            rep = sample_oleinik(art, fam, build_measures(art, fam),
                                 np.random.default_rng(seed), samples, xr)
            Cs.append(rep.C)
            passes.append(rep.passed)
        ratios = [(b / a if a > 0 else (1.0 if b == 0 else math.inf)) for a, b in zip(Cs, Cs[1:])]
        detail[name] = {"C": Cs, "ratios": ratios, "C_accept": 16.0 / sc.config.flux.convexity_const}
        ok = ok and all(passes) and all(r <= 1.5 for r in ratios)
    return CriterionResult(9, "Oleinik verifier", ok, detail, time.perf_counter() - t0)


def sbv_trend() -> CriterionResult:
    t0 = time.perf_counter()
    sc, levels = _level_runs("merging_shocks")
    rep = exceptional_times([a for _, a in levels], [c.beta for c, _ in levels],
                            snapshot_times=sc.config.snapshot_times)
    tau = levels[-1][0].tau
    merge_ok = len(rep.flagged) == 1 and abs(rep.flagged[0] - 1.0) <= tau
    detail = {"merging_flagged": rep.flagged, "theta": rep.theta}
    trend_ok = rep.trend_ok
    for name in ("burgers_rarefaction", "damped_ramp"):
        sc2, lv = _level_runs(name)
        r2 = exceptional_times([a for _, a in lv], [c.beta for c, _ in lv],
                               snapshot_times=sc2.config.snapshot_times)
        detail[name] = {"flagged": r2.flagged,
                        "cantor_trend": {repr(k): v for k, v in r2.cantor_trend.items()}}
        trend_ok = trend_ok and r2.trend_ok and bool(r2.cantor_trend)
    return CriterionResult(10, "SBV trend", merge_ok and trend_ok, detail, time.perf_counter() - t0)


CRITERIA = {
    1: riemann_oracle,
    2: functional_monotonicity,
    3: source_growth,
    4: splitting_accuracy,
    5: measure_identities,
    6: measure_mass_bounds,
    7: jump_count,
    8: region_balances,
    9: oleinik_verifier,
    10: sbv_trend,
}


def run_criterion(k: int) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[k]()
    res.seconds = time.perf_counter() - t0
    return res


def run_all() -> list[CriterionResult]:
    return [run_criterion(k) for k in sorted(CRITERIA)]
