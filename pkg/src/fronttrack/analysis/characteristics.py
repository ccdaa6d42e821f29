"""Generalized characteristics of a front-tracking run and balances on the
regions they bound.

A forward characteristic moves with speed ``f'(u)`` inside a constant
region and follows a front when it cannot leave it without crossing. When
several continuations are admissible (at the origin of a fan) the leftmost
one is taken.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InvalidBoundary, OutOfWindow

__all__ = [
    "CharacteristicCurve",
    "CharacteristicRegion",
    "BalanceReport",
    "generalized_characteristic",
    "region_balance",
    "random_regions",
    "BALANCES",
]

BALANCES = ("full", "evcont", "evjump", "evcontfp", "evjumpfp", "ultimaf")


@dataclass(frozen=True)
class Segment:
    t0: float
    x0: float
    t1: float
    x1: float
    front_id: int | None
    slope_ok: bool

    @property
    def slope(self) -> float:
        return (self.x1 - self.x0) / (self.t1 - self.t0) if self.t1 > self.t0 else 0.0


@dataclass(frozen=True)
class CharacteristicCurve:
    anchor: tuple[float, float]
    segments: tuple[Segment, ...]
    direction: str = "forward"

    @property
    def samples(self) -> list[tuple[float, float]]:
        if not self.segments:
            return [self.anchor]
        pts = [(self.segments[0].t0, self.segments[0].x0)]
        pts.extend((s.t1, s.x1) for s in self.segments)
        return pts

    @property
    def t_end(self) -> float:
        return self.segments[-1].t1 if self.segments else self.anchor[0]

    def position(self, t: float) -> float:
        for s in self.segments:
            if s.t0 <= t <= s.t1:
                if s.t1 == s.t0:
                    return s.x1
                return s.x0 + (s.x1 - s.x0) * (t - s.t0) / (s.t1 - s.t0)
        if self.segments and t > self.t_end:
            raise ValueError(f"t={t} past the end of the curve")
        return self.anchor[1]

    def positions(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`position` for times inside the curve's span."""
        pts = np.array(self.samples, dtype=float)
        return np.interp(ts, pts[:, 0], pts[:, 1])

    @property
    def slopes_ok(self) -> bool:
        return all(s.slope_ok for s in self.segments)

    def to_csv_rows(self) -> list[tuple[float, float]]:
        return self.samples


def _options(group, fp, tol):
    """Admissible continuations at a point where the fronts ``group`` sit.

    Returns a list of ``(kind, value_or_index, left_index, right_index)``
    ordered from left to right, kind being "region" or "front". Indices
    refer to ``group``; -1 and len(group) mean outside.
    """
    speeds = [f.speed for f in group]
    n = len(group)
    opts = []
    a = group[0].left
    if fp(a) <= speeds[0] + tol:
        opts.append(("region", a, -1, 0))
    for k, f in enumerate(group):
        lo, hi = sorted((fp(f.left), fp(f.right)))
        if lo - tol <= f.speed <= hi + tol:
            opts.append(("front", k, k, k))
        v = f.right
        upper = speeds[k + 1] if k + 1 < n else math.inf
        if speeds[k] - tol <= fp(v) <= upper + tol:
            opts.append(("region", v, k, k + 1))
    return opts


def generalized_characteristic(run, anchor: tuple[float, float], t_end: float,
                               max_steps: int = 1_000_000) -> CharacteristicCurve:
    """Minimal forward characteristic from ``anchor`` up to ``t_end``."""
    t, x = float(anchor[0]), float(anchor[1])
    T = run.T
    if not (0.0 <= t <= T and t <= t_end <= T * (1 + 1e-12) and math.isfinite(x)):
        raise OutOfWindow(f"anchor {anchor} / t_end={t_end} outside [0, {T}]")
    fp = run.config.flux.f_prime
    lo_r, hi_r = run.config.flux.working_range
    tol_v = 1e-9 * max(1.0, hi_r - lo_r)
    segs: list[Segment] = []
    steps = 0
    while t < t_end:
        steps += 1
        if steps > max_steps:
            raise RuntimeError("characteristic did not terminate")
        tol_x = 1e-10 * max(1.0, abs(x))
        fronts = run.fronts_at(t)
        pos = np.array([f.position(t) for f in fronts])
        at = np.nonzero(np.abs(pos - x) <= tol_x)[0] if len(pos) else np.zeros(0, int)
        if len(at):
            i0, i1 = int(at[0]), int(at[-1])
            group = fronts[i0:i1 + 1]
            opts = _options(group, fp, tol_v)
            choice = opts[0] if opts else ("front", 0, 0, 0)
            if choice[0] == "front":
                fr = group[choice[1]]
                t1 = min(run.death_time(fr.id), t_end)
                x1 = fr.position(t1)
                segs.append(Segment(t, x, t1, x1, fr.id, bool(opts)))
                t, x = t1, x1
                continue
            v = choice[1]
            left = fronts[i0 + choice[2]] if i0 + choice[2] >= 0 else None
            ri = i0 + choice[3]
            right = fronts[ri] if ri < len(fronts) else None
        else:
            k = int(np.searchsorted(pos, x)) if len(pos) else 0
            left = fronts[k - 1] if k > 0 else None
            right = fronts[k] if k < len(fronts) else None
            v = left.right if left is not None else run.left_state_at(t)
        c = fp(v)
        horizon = min(t_end, run.slab_end(t))
        hit = None
        for nb, side in ((left, -1), (right, 1)):
            if nb is None:
                continue
            horizon = min(horizon, run.death_time(nb.id))
            gap = (nb.position(t) - x) * side
            closing = (c - nb.speed) * side
            if gap > tol_x and closing > 0:
                th = t + gap / closing
                if th < horizon and (hit is None or th < hit[0]):
                    hit = (th, nb)
        if hit is not None:
            t1, nb = hit
            x1 = nb.position(t1)
        else:
            t1 = horizon
            x1 = x + c * (t1 - t)
        segs.append(Segment(t, x, t1, x1, None, True))
        t, x = t1, x1
    return CharacteristicCurve((float(anchor[0]), float(anchor[1])), tuple(segs))


@dataclass
class CharacteristicRegion:
    """Union over ``i`` of ``[a_i(tau), b_i(tau)]`` for ``s <= tau <= t``."""

    s: float
    t: float
    bounds: list[tuple[CharacteristicCurve, CharacteristicCurve]]

    @classmethod
    def from_anchors(cls, run, s: float, t: float, intervals: Sequence[tuple[float, float]]):
        bounds = []
        for a, b in intervals:
            if b < a:
                raise ValueError("interval endpoints out of order")
            bounds.append((generalized_characteristic(run, (s, a), t),
                           generalized_characteristic(run, (s, b), t)))
        return cls(s, t, bounds)

    def intervals_at(self, tau: float) -> list[tuple[float, float]]:
        return [(a.position(tau), b.position(tau)) for a, b in self.bounds]

    @property
    def k(self) -> int:
        return len(self.bounds)

    def contains(self, tau: float, x: float, tol: float = 1e-9) -> bool:
        return any(lo - tol <= x <= hi + tol for lo, hi in self.intervals_at(tau))

    def lebesgue(self, tau: float) -> float:
        ivs = sorted(self.intervals_at(tau))
        total, cur = 0.0, None
        for lo, hi in ivs:
            if cur is None or lo > cur[1]:
                if cur is not None:
                    total += cur[1] - cur[0]
                cur = [lo, hi]
            else:
                cur[1] = max(cur[1], hi)
        if cur is not None:
            total += cur[1] - cur[0]
        return total

    def boundary_error(self, run) -> float:
        """Largest ``|a' - f'(u(a-))|`` or ``|b' - f'(u(b+))|`` over boundary segments."""
        fp = run.config.flux.f_prime
        worst = 0.0
        for a, b in self.bounds:
            for curve, side in ((a, -1.0), (b, 1.0)):
                for sg in curve.segments:
                    if sg.t1 <= sg.t0:
                        continue
                    tm = 0.5 * (sg.t0 + sg.t1)
                    xm = 0.5 * (sg.x0 + sg.x1)
                    u = run.profile_at(tm)(xm + side * 1e-9 * max(1.0, abs(xm)))
                    worst = max(worst, abs(sg.slope - fp(u)))
        return worst


@dataclass
class BalanceReport:
    entries: dict[str, dict] = field(default_factory=dict)
    phi_jump: float = 0.0
    phi_cont: float = 0.0
    boundary_ok: bool = True
    boundary_error: float = 0.0

    @property
    def passed(self) -> bool:
        return self.boundary_ok and all(e["pass"] for e in self.entries.values()) \
            and self.phi_jump <= 1e-9

    def to_dict(self) -> dict:
        return {"entries": self.entries, "phi_jump": self.phi_jump, "phi_cont": self.phi_cont,
                "boundary_ok": self.boundary_ok, "boundary_error": self.boundary_error,
                "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _mass_in_region(m, region: CharacteristicRegion, signed: bool = False, tol: float = 1e-9) -> float:
    """``|m|(A)`` (or ``m(A)``) for ``A = {s < tau <= t, x in J(tau)}``."""
    sel = (m.t > region.s) & (m.t <= region.t)
    ts, xs, ws = m.t[sel], m.x[sel], m.w[sel]
    if not len(ts):
        return 0.0
    slack = tol * np.maximum(1.0, np.abs(xs))
    inside = np.zeros(len(ts), dtype=bool)
    for a, b in region.bounds:
        inside |= (xs >= a.positions(ts) - slack) & (xs <= b.positions(ts) + slack)
    w = ws[inside]
    return math.fsum(w if signed else np.abs(w))


def _restricted(measure1d, ivs, tol=1e-9) -> float:
    if not measure1d.atoms:
        return 0.0
    arr = np.array(measure1d.atoms, dtype=float)
    xs, ws = arr[:, 0], arr[:, 1]
    slack = tol * np.maximum(1.0, np.abs(xs))
    inside = np.zeros(len(xs), dtype=bool)
    for lo, hi in ivs:
        inside |= (xs >= lo - slack) & (xs <= hi + slack)
    return math.fsum(ws[inside])


def region_balance(run, region: CharacteristicRegion, family, measures,
                   strict: bool = True, log_boundary_error: bool = False) -> BalanceReport:
    """Both sides of the six region balances on ``region``."""
    from ..measures import split_derivative

    rep = BalanceReport()
    for a, b in region.bounds:
        if not (a.slopes_ok and b.slopes_ok):
            rep.boundary_ok = False
    if strict and not rep.boundary_ok:
        raise InvalidBoundary("a boundary segment violates the characteristic slope condition")
    flux = run.config.flux
    fpp = flux.f_second_bound
    s, t = region.s, region.t
    J_s, J_t = region.intervals_at(s), region.intervals_at(t)
    du_s, du_t = split_derivative(run, s, family), split_derivative(run, t, family)
    de_s, de_t = split_derivative(run, s, family, flux), split_derivative(run, t, family, flux)

    def change(ds, dt, part):
        if part == "full":
            return (_restricted(dt.jump_part, J_t) + _restricted(dt.cont_part, J_t)
                    - _restricted(ds.jump_part, J_s) - _restricted(ds.cont_part, J_s))
        attr = "jump_part" if part == "jump" else "cont_part"
        return _restricted(getattr(dt, attr), J_t) - _restricted(getattr(ds, attr), J_s)

    drop = run.upsilon_negative_variation(s, t)
    m = measures
    rows = {
        "full": (change(du_s, du_t, "full"), _mass_in_region(m.mu, region), drop),
        "evcont": (change(du_s, du_t, "cont"), _mass_in_region(m.mu_cont, region), drop),
        "evjump": (change(du_s, du_t, "jump"), _mass_in_region(m.mu_jump, region), 0.0),
        "evcontfp": (change(de_s, de_t, "cont"), _mass_in_region(m.xi_cont, region), fpp * drop),
        "evjumpfp": (change(de_s, de_t, "jump"), _mass_in_region(m.xi_jump, region), 0.0),
        "ultimaf": (change(de_s, de_t, "full"), _mass_in_region(m.xi, region), fpp * drop),
    }
    for name, (lhs, meas, extra) in rows.items():
        rhs = meas + extra
        tol = 1e-9 * max(1.0, abs(lhs), rhs)
        rep.entries[name] = {"lhs": lhs, "measure": meas, "upsilon_term": extra,
                             "rhs": rhs, "slack": rhs - lhs, "pass": lhs <= rhs + tol}
    rep.phi_jump = rows["evjump"][0] - _mass_in_region(m.mu_jump, region, signed=True)
    rep.phi_cont = rows["evcont"][0] - _mass_in_region(m.mu_cont, region, signed=True)
    if log_boundary_error:
        rep.boundary_error = region.boundary_error(run)
    return rep


def random_regions(run, n: int, rng: np.random.Generator, x_range: tuple[float, float],
                   max_intervals: int = 3) -> list[CharacteristicRegion]:
    """Random regions made of 1 to ``max_intervals`` characteristic intervals."""
    T = run.T
    out = []
    for _ in range(n):
        s = float(rng.uniform(0.0, 0.8 * T))
        t = float(rng.uniform(s + 0.05 * T, T))
        k = int(rng.integers(1, max_intervals + 1))
        xs = np.sort(rng.uniform(x_range[0], x_range[1], 2 * k))
        ivs = [(float(xs[2 * i]), float(xs[2 * i + 1])) for i in range(k)]
        out.append(CharacteristicRegion.from_anchors(run, s, t, ivs))
    return out
