"""Two-sided one-sided-Lipschitz (Oleinik type) checks and exceptional-time
diagnostics.

The positive part of the untraced derivative at time ``t`` is compared with
what an earlier time ``s < t`` allows, the negative part with a later time
``s > t``:

    [D^cont u(t)]^+(B) <= C (|B|/(t-s) + |f''| mu_source([s,t]) + TV^-(Y; (s,t]) + k eps)
    [D^cont u(t)]^-(B) <= C (|B|/(s-t) + |xi_cont|([t,s]) + TV^-(Y; (t,s]) + k eps)

``k`` is the number of intervals of ``B``; ``k eps`` accounts for a
discretized rarefaction straddling an endpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import Degenerate, ScheduleViolation

__all__ = [
    "OleinikEntry",
    "OleinikReport",
    "oleinik_constant",
    "oleinik_two_sided",
    "exact_rarefaction_entry",
    "sample_oleinik",
    "check_schedule",
    "time_measure",
    "ExceptionalTimesReport",
    "exceptional_times",
]


def oleinik_constant(lhs: float, rhs: float) -> float:
    """Smallest ``C`` with ``lhs <= C rhs`` (0 if lhs vanishes, inf if only rhs does)."""
    if lhs < 0 or rhs < 0:
        raise ValueError("both sides must be nonnegative")
    if lhs == 0.0:
        return 0.0
    return math.inf if rhs == 0.0 else lhs / rhs


def _merge(B: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for lo, hi in sorted((float(a), float(b)) for a, b in B):
        if hi < lo:
            raise ValueError("interval endpoints out of order")
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


@dataclass(frozen=True)
class OleinikEntry:
    t: float
    s: float
    B: tuple[tuple[float, float], ...]
    side: str  # "positive" or "negative"
    lhs_pos: float
    lhs_neg: float
    l1_term: float
    measure_term: float
    upsilon_term: float
    eps_term: float
    C: float
    C_accept: float

    @property
    def lhs(self) -> float:
        return self.lhs_pos if self.side == "positive" else self.lhs_neg

    @property
    def rhs(self) -> float:
        return self.l1_term + self.measure_term + self.upsilon_term + self.eps_term

    @property
    def passed(self) -> bool:
        return self.C <= self.C_accept

    def to_dict(self) -> dict:
        return {"t": self.t, "s": self.s, "B": [list(b) for b in self.B], "side": self.side,
                "lhs_pos": self.lhs_pos, "lhs_neg": self.lhs_neg, "l1_term": self.l1_term,
                "measure_term": self.measure_term, "upsilon_term": self.upsilon_term,
                "eps_term": self.eps_term, "rhs": self.rhs, "C": self.C, "pass": self.passed}


@dataclass
class OleinikReport:
    entries: list[OleinikEntry] = field(default_factory=list)
    C_accept: float = math.inf
    convexity: float = 0.0

    @property
    def C(self) -> float:
        return max((e.C for e in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def extend(self, other: "OleinikReport") -> None:
        self.entries.extend(other.entries)

    def to_dict(self) -> dict:
        return {"C": self.C, "C_accept": self.C_accept, "convexity": self.convexity,
                "pass": self.passed, "entries": [e.to_dict() for e in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _accept(flux, C_accept):
    if flux.convexity_const <= 0:
        raise Degenerate(f"flux {flux.name!r} is not uniformly convex")
    return 16.0 / flux.convexity_const if C_accept is None else float(C_accept)


def oleinik_two_sided(run, t: float, s: float, B: Sequence[tuple[float, float]], family,
                      measures, flux=None, C_accept: float | None = None) -> OleinikReport:
    """Evaluate the bound for the side selected by ``s`` (before or after ``t``)."""
    from ..measures import split_derivative

    flux = flux or run.config.flux
    acc = _accept(flux, C_accept)
    T = run.T
    if not (0.0 <= min(s, t) < max(s, t) <= T * (1 + 1e-12)):
        raise ValueError(f"need 0 <= min(s,t) < max(s,t) <= T, got s={s}, t={t}")
    ivs = _merge(B)
    cont = split_derivative(run, t, family).cont_part.restrict(ivs)
    lhs_pos = cont.positive_part().mass
    lhs_neg = cont.negative_part().mass
    l1 = math.fsum(b - a for a, b in ivs)
    lo, hi = min(s, t), max(s, t)
    eps_term = len(ivs) * run.config.epsilon
    ups = run.upsilon_negative_variation(lo, hi)
    if s < t:
        side, lhs = "positive", lhs_pos
        src = measures.mu_source
        sel = (src.t >= lo) & (src.t <= hi)
        meas = flux.f_second_bound * float(np.abs(src.w[sel]).sum())
    else:
        side, lhs = "negative", lhs_neg
        xc = measures.xi_cont
        sel = (xc.t >= lo) & (xc.t <= hi)
        meas = float(np.abs(xc.w[sel]).sum())
    rhs = l1 / (hi - lo) + meas + ups + eps_term
    e = OleinikEntry(float(t), float(s), tuple(ivs), side, lhs_pos, lhs_neg, l1 / (hi - lo),
                     meas, ups, eps_term, oleinik_constant(lhs, rhs), acc)
    return OleinikReport([e], acc, flux.convexity_const)


def exact_rarefaction_entry(t: float, B: Sequence[tuple[float, float]],
                            C_accept: float = 16.0) -> OleinikEntry:
    """The positive bound for the exact Burgers fan ``u = x/t`` from ``s = 0``.

    The derivative is ``1/t`` on ``(0, t)`` and nothing else, with no
    source, no interactions and no discretization.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    ivs = _merge(B)
    lhs = math.fsum(max(0.0, min(b, t) - max(a, 0.0)) for a, b in ivs) / t
    l1 = math.fsum(b - a for a, b in ivs) / t
    return OleinikEntry(float(t), 0.0, tuple(ivs), "positive", lhs, 0.0, l1, 0.0, 0.0, 0.0,
                        oleinik_constant(lhs, l1), C_accept)


def _random_union(rng, x_range, max_intervals, min_len):
    lo, hi = x_range
    k = int(rng.integers(1, max_intervals + 1))
    out = []
    for _ in range(k):
        ln = float(rng.uniform(min_len, max(min_len, 0.5 * (hi - lo))))
        a = float(rng.uniform(lo, hi - ln))
        out.append((a, a + ln))
    return _merge(out)


def sample_oleinik(run, family, measures, rng: np.random.Generator, n: int,
                   x_range: tuple[float, float], max_intervals: int = 3,
                   min_len: float | None = None, C_accept: float | None = None) -> OleinikReport:
    """``n`` random checks on each side; the report's ``C`` is the fitted constant."""
    flux = run.config.flux
    acc = _accept(flux, C_accept)
    T = run.T
    if min_len is None:
        min_len = 0.1 * (x_range[1] - x_range[0])
    rep = OleinikReport([], acc, flux.convexity_const)
    for _ in range(n):
        t = float(rng.uniform(0.25 * T, T))
        s = float(rng.uniform(0.0, 0.75 * t))
        rep.extend(oleinik_two_sided(run, t, s, _random_union(rng, x_range, max_intervals, min_len),
                                     family, measures, flux, acc))
        t = float(rng.uniform(0.0, 0.75 * T))
        s = float(rng.uniform(t + 0.25 * (T - t), T))
        rep.extend(oleinik_two_sided(run, t, s, _random_union(rng, x_range, max_intervals, min_len),
                                     family, measures, flux, acc))
    return rep


def check_schedule(levels: Sequence[tuple[float, float, float]], growth_bound: float) -> None:
    """Raise ScheduleViolation unless ``(eps, tau, beta)`` refine admissibly.

    Each level needs ``tau <= eps`` and ``beta > 4 (eps + growth_bound tau)``;
    ``eps`` must strictly decrease and ``beta`` must not increase.
    """
    if not levels:
        raise ScheduleViolation("empty schedule")
    for k, (eps, tau, beta) in enumerate(levels):
        if not (0 < tau <= eps):
            raise ScheduleViolation(f"level {k}: need 0 < tau <= eps (tau={tau}, eps={eps})")
        need = 4.0 * (eps + growth_bound * tau)
        if not beta > need:
            raise ScheduleViolation(f"level {k}: beta={beta} must exceed {need}")
        if k:
            pe, _, pb = levels[k - 1]
            if not eps < pe:
                raise ScheduleViolation(f"level {k}: eps must strictly decrease")
            if beta > pb:
                raise ScheduleViolation(f"level {k}: beta must not increase")


def time_measure(run, measures) -> tuple[np.ndarray, np.ndarray]:
    """Atoms ``(times, weights)`` of the scalar measure on ``(0, T]``.

    It collects ``|xi_cont|`` at positive times, ``|f''|`` times the source
    batches and every decrease of the Glimm functional.
    """
    fpp = run.config.flux.f_second_bound
    xc = measures.xi_cont
    pos = xc.t > 0
    ts = [xc.t[pos], measures.mu_source.t]
    ws = [np.abs(xc.w[pos]), fpp * np.abs(measures.mu_source.w)]
    tr = run.trace
    if len(tr) > 1:
        up = np.array([e.upsilon for e in tr])
        tt = np.array([e.t for e in tr])
        drop = np.maximum(up[:-1] - up[1:], 0.0)
        keep = (drop > 0) & (tt[1:] > 0)
        ts.append(tt[1:][keep])
        ws.append(drop[keep])
    t = np.concatenate(ts)
    w = np.concatenate(ws)
    order = np.argsort(t, kind="stable")
    return t[order], w[order]


def _windows(T: float, tau: float) -> np.ndarray:
    """Edges of width-``tau`` windows centred on ``k tau``; the first starts at 0."""
    n = int(math.floor(T / tau + 1e-9))
    edges = [0.0] + [(k + 0.5) * tau for k in range(1, n)] + [T]
    return np.array(edges)


@dataclass
class ExceptionalTimesReport:
    flagged: list[float]
    theta: float
    window_edges: list[float]
    window_mass: list[float]
    cantor_trend: dict[float, list[float]]
    cantor_ok: dict[float, bool]
    betas: list[float]

    @property
    def trend_ok(self) -> bool:
        return all(self.cantor_ok.values())

    def to_dict(self) -> dict:
        return {"flagged": self.flagged, "theta": self.theta, "betas": self.betas,
                "window_edges": self.window_edges, "window_mass": self.window_mass,
                "cantor_trend": {repr(k): v for k, v in self.cantor_trend.items()},
                "cantor_ok": {repr(k): v for k, v in self.cantor_ok.items()},
                "trend_ok": self.trend_ok}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def exceptional_times(runs: Sequence, schedule: Sequence[float], theta: float | None = None,
                      snapshot_times: Sequence[float] | None = None,
                      noise: float = 0.1) -> ExceptionalTimesReport:
    """Flag windows of the finest run carrying an atom-like mass of the time measure.

    ``schedule`` lists the traced-jump thresholds of the runs, coarse to
    fine. Windows are centred on the finest run's update times; a window is
    flagged when its mass exceeds ``theta`` (default three times the median
    window mass) and is reported by its heaviest atom. At the remaining
    snapshot times the untraced-atom concentration must decrease along the
    runs up to a relative ``noise``.
    """
    from ..jumps import trace_discontinuities
    from ..measures import build_measures, split_derivative

    if len(runs) != len(schedule) or not runs:
        raise ScheduleViolation("need one threshold per run")
    check_schedule([(r.config.epsilon, r.config.tau, b) for r, b in zip(runs, schedule)],
                   max(r.config.growth_bound for r in runs))
    fams = [trace_discontinuities(r.log, r, b) for r, b in zip(runs, schedule)]
    fine = runs[-1]
    t, w = time_measure(fine, build_measures(fine, fams[-1]))
    edges = _windows(fine.T, fine.config.tau)
    idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(edges) - 2)
    mass = np.bincount(idx, weights=w, minlength=len(edges) - 1)
    if theta is None:
        theta = max(3.0 * float(np.median(mass)), 1e-12)
    flagged = []
    for k in np.nonzero(mass > theta)[0]:
        sel = idx == k
        ut, inv = np.unique(t[sel], return_inverse=True)
        agg = np.bincount(inv, weights=w[sel])
        flagged.append(float(ut[int(np.argmax(agg))]))
    if snapshot_times is None:
        snapshot_times = [fine.T * q for q in (0.25, 0.5, 0.75, 1.0)]
    trend: dict[float, list[float]] = {}
    ok: dict[float, bool] = {}
    for ts in snapshot_times:
        k = min(int(np.searchsorted(edges, ts, side="right")) - 1, len(mass) - 1)
        if mass[max(k, 0)] > theta:
            continue
        vals = []
        for r, fam in zip(runs, fams):
            m_atoms = int(math.ceil(r.config.epsilon ** -0.5))
            vals.append(split_derivative(r, float(ts), fam, m_atoms=m_atoms).cantor_proxy)
        trend[float(ts)] = vals
        ok[float(ts)] = all(b <= (1 + noise) * a + 1e-12 for a, b in zip(vals, vals[1:]))
    return ExceptionalTimesReport(flagged, float(theta), edges.tolist(), mass.tolist(), trend, ok,
                                  [float(b) for b in schedule])
