"""Space-time balance measures of a front-tracking run.

All measures are purely atomic. The wave-balance measure has an atom at
every event node with weight (outgoing sizes) - (incoming sizes); sizes are
conserved at collisions, so for ``t > 0`` it lives on the update points.
The jump part does the same bookkeeping restricted to traced fronts, the
continuous part is the difference. The source measure charges each update
time with ``tau`` times the variation of the pre-update profile plus the
local mass of ``alpha``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bv import BVDecomposition, SignedAtomicMeasure1D, cantor_proxy
from .errors import BoundViolation
from .jumps import JumpFamily
from .riemann import FluxModel
from .tracking import COLLISION, INITIAL, SOURCE

__all__ = [
    "AtomicMeasure2D",
    "BoundEntry",
    "BoundsReport",
    "source_measure",
    "wave_balance_measure",
    "jump_balance_measure",
    "cont_balance_measure",
    "eta_xi_measures",
    "split_derivative",
    "build_measures",
    "verify_measure_bounds",
]

_CHOP = 1e-13


@dataclass(frozen=True)
class AtomicMeasure2D:
    """Signed atoms ``(t, x, weight)`` on the strip, sorted by ``(t, x)``."""

    t: np.ndarray
    x: np.ndarray
    w: np.ndarray
    tags: tuple[str, ...]

    @classmethod
    def from_atoms(cls, atoms) -> "AtomicMeasure2D":
        atoms = sorted(atoms, key=lambda a: (a[0], a[1]))
        if not atoms:
            e = np.zeros(0)
            return cls(e, e.copy(), e.copy(), ())
        t, x, w, tags = zip(*atoms)
        return cls(np.array(t, float), np.array(x, float), np.array(w, float), tuple(tags))

    def __len__(self):
        return len(self.w)

    def atoms(self):
        return list(zip(self.t.tolist(), self.x.tolist(), self.w.tolist(), self.tags))

    @property
    def mass(self) -> float:
        return float(np.abs(self.w).sum())

    @property
    def total(self) -> float:
        return float(self.w.sum())

    def select(self, mask) -> "AtomicMeasure2D":
        idx = np.nonzero(mask)[0]
        return AtomicMeasure2D(self.t[idx], self.x[idx], self.w[idx],
                               tuple(self.tags[i] for i in idx))

    def restrict_time(self, t1: float, t2: float, left_closed: bool = False) -> "AtomicMeasure2D":
        """Atoms with ``t1 < t <= t2`` (or ``t1 <= t`` when ``left_closed``)."""
        lo = self.t >= t1 if left_closed else self.t > t1
        return self.select(lo & (self.t <= t2))

    def positive_times(self) -> "AtomicMeasure2D":
        return self.select(self.t > 0)

    def batches(self) -> dict[float, float]:
        """Total variation mass per atom time."""
        out: dict[float, float] = {}
        for t, w in zip(self.t.tolist(), self.w.tolist()):
            out[t] = out.get(t, 0.0) + abs(w)
        return out

    def __sub__(self, other: "AtomicMeasure2D") -> "AtomicMeasure2D":
        acc: dict[tuple[float, float], list] = {}
        for t, x, w, tag in self.atoms():
            acc.setdefault((t, x), [0.0, tag])[0] += w
        for t, x, w, tag in other.atoms():
            e = acc.setdefault((t, x), [0.0, tag])
            e[0] -= w
        return AtomicMeasure2D.from_atoms(
            (t, x, w, tag) for (t, x), (w, tag) in acc.items() if abs(w) > _CHOP)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "x", "weight", "tag"])
            for t, x, w, tag in self.atoms():
                wr.writerow([repr(t), repr(x), repr(w), tag])


def _chop(w: float, scale: float = 1.0) -> bool:
    return abs(w) > _CHOP * max(1.0, scale)


def source_measure(run) -> AtomicMeasure2D:
    """``tau`` times ``|D_x u(n tau -)|`` plus ``tau q_{j,n}`` at the cell points."""
    cfg = run.config
    tau, eps, src = cfg.tau, cfg.epsilon, cfg.source
    jmin = math.floor(cfg.window[0] / eps)
    jmax = math.ceil(cfg.window[1] / eps)
    q = []
    if src.alpha_l1 > 0:
        for j in range(jmin, jmax + 1):
            v = src.q((j - 1) * eps, (j + 1) * eps)
            if v > 0:
                q.append((j * eps, v))
    atoms = []
    for tn, p in zip(run.update_times, run.pre_update):
        for x, s in zip(p.breakpoints, p.jumps):
            atoms.append((tn, x, tau * abs(s), "update"))
        for x, v in q:
            atoms.append((tn, x, tau * v, "update"))
    return AtomicMeasure2D.from_atoms(atoms)


def _record_tag(rec) -> str:
    return {INITIAL: "initial", COLLISION: "collision", SOURCE: "update"}[rec.type]


def _weighted_balance(run, weight, keep=None, tagger=None) -> AtomicMeasure2D:
    log = run.log
    fronts = log.fronts
    atoms = []
    for rec in log.records:
        ins = [f for f in rec.in_ids if keep is None or keep(f)]
        outs = [f for f in rec.out_ids if keep is None or keep(f)]
        if not ins and not outs:
            continue
        w_out = math.fsum(weight(fronts[f]) for f in outs)
        w_in = math.fsum(weight(fronts[f]) for f in ins)
        w = w_out - w_in
        if _chop(w, max(abs(w_out), abs(w_in))):
            tag = tagger(rec, ins, outs) if tagger else _record_tag(rec)
            atoms.append((rec.t, rec.x, w, tag))
    return AtomicMeasure2D.from_atoms(atoms)


def _size(fr) -> float:
    return fr.size


def wave_balance_measure(run) -> AtomicMeasure2D:
    return _weighted_balance(run, _size)


def _jump_tag(rec, ins, outs) -> str:
    if rec.type == INITIAL:
        return "initial"
    if outs and not ins:
        return "curve-start"
    if ins and not outs:
        return "curve-end"
    return _record_tag(rec)


def jump_balance_measure(run, family: JumpFamily) -> AtomicMeasure2D:
    family.check_log(run.log)
    return _weighted_balance(run, _size, family.is_traced, _jump_tag)


def cont_balance_measure(mu: AtomicMeasure2D, mu_jump: AtomicMeasure2D) -> AtomicMeasure2D:
    return mu - mu_jump


def eta_xi_measures(run, family: JumpFamily, flux: FluxModel) -> dict[str, AtomicMeasure2D]:
    """Balance measures of ``D_x f'(u)``: weights ``f'(right) - f'(left)``."""
    family.check_log(run.log)

    def weight(fr):
        return flux.f_prime(fr.right) - flux.f_prime(fr.left)

    xi = _weighted_balance(run, weight)
    xi_jump = _weighted_balance(run, weight, family.is_traced, _jump_tag)
    return {"xi": xi, "xi_jump": xi_jump, "xi_cont": xi - xi_jump}


def split_derivative(run, t: float, family: JumpFamily, flux: FluxModel | None = None,
                     m_atoms: int = 0) -> BVDecomposition:
    """``D_x u(t)`` (or ``D_x f'(u(t))``) split into traced and untraced atoms.

    Fronts sharing a position at ``t`` are merged; the merged atom is traced
    if any of its fronts is.
    """
    family.check_log(run.log)
    jump, cont = [], []
    cur = None
    for fr in run.fronts_at(t):
        x = fr.position(t)
        if cur is not None and x == cur[0]:
            cur[2] = fr.right
            cur[3] = cur[3] or family.is_traced(fr.id)
        else:
            if cur is not None:
                (jump if cur[3] else cont).append(cur)
            cur = [x, fr.left, fr.right, family.is_traced(fr.id)]
    if cur is not None:
        (jump if cur[3] else cont).append(cur)

    def w(a, b):
        return (flux.f_prime(b) - flux.f_prime(a)) if flux is not None else b - a

    j = SignedAtomicMeasure1D(tuple((x, w(a, b)) for x, a, b, _ in jump))
    c = SignedAtomicMeasure1D(tuple((x, w(a, b)) for x, a, b, _ in cont))
    proxy = cantor_proxy(c, family.beta, m_atoms) if m_atoms > 0 else 0.0
    return BVDecomposition(j, c, proxy, family.beta)


@dataclass
class Measures:
    mu: AtomicMeasure2D
    mu_jump: AtomicMeasure2D
    mu_cont: AtomicMeasure2D
    mu_source: AtomicMeasure2D
    xi: AtomicMeasure2D
    xi_jump: AtomicMeasure2D
    xi_cont: AtomicMeasure2D

    def items(self):
        return [("mu", self.mu), ("mu_jump", self.mu_jump), ("mu_cont", self.mu_cont),
                ("mu_source", self.mu_source), ("xi", self.xi), ("xi_jump", self.xi_jump),
                ("xi_cont", self.xi_cont)]


def build_measures(run, family: JumpFamily) -> Measures:
    mu = wave_balance_measure(run)
    mj = jump_balance_measure(run, family)
    ex = eta_xi_measures(run, family, run.config.flux)
    return Measures(mu, mj, cont_balance_measure(mu, mj), source_measure(run),
                    ex["xi"], ex["xi_jump"], ex["xi_cont"])


@dataclass(frozen=True)
class BoundEntry:
    lhs: float
    rhs: float
    enforced: bool = True
    detail: str = ""

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "pass": self.passed, "enforced": self.enforced, "detail": self.detail}


@dataclass
class BoundsReport:
    entries: dict[str, BoundEntry] = field(default_factory=dict)
    constants: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries.values() if e.enforced)

    def failures(self) -> list[str]:
        return [k for k, e in self.entries.items() if e.enforced and not e.passed]

    def to_json(self) -> str:
        return json.dumps({"pass": self.passed, "constants": self.constants,
                           "entries": {k: e.to_dict() for k, e in self.entries.items()}},
                          sort_keys=True, indent=2)


def _batch_check(lhs: dict[float, float], rhs: dict[float, float], factor: float) -> BoundEntry:
    """Worst ratio of ``lhs`` batches to ``factor * rhs`` batches."""
    worst, where = 0.0, None
    for t, v in lhs.items():
        r = v / (factor * rhs.get(t, 0.0) * 1.01 + 1e-12)
        if r > worst:
            worst, where = r, t
    return BoundEntry(worst, 1.0, detail=f"max batch ratio at t={where}")


def verify_measure_bounds(m: Measures, run, family: JumpFamily, strict: bool = False) -> BoundsReport:
    """Check the mass bounds of the balance measures of one run.

    ``lhs`` and ``rhs`` of each entry are chosen so that ``lhs <= rhs`` is
    the inequality; ratio checks report the worst ratio against 1.
    """
    family.check_log(run.log)
    cfg = run.config
    L, a1, tau, T = cfg.source.lipschitz_L, cfg.source.alpha_l1, cfg.tau, cfg.T
    gb = cfg.growth_bound
    rep = BoundsReport(constants={"L": L, "alpha_l1": a1, "G": cfg.G, "delta_bar": cfg.delta_bar,
                                  "kappa": cfg.kappa, "beta": family.beta, "tau": tau,
                                  "f_second_bound": cfg.flux.f_second_bound})
    src_b = m.mu_source.batches()
    pos = m.mu.positive_times()
    # (a) wave balance against the source, one update batch at a time
    rep.entries["mu_vs_source"] = _batch_check(pos.batches(), src_b, 1.0 + L)
    # (b) strip mass of the source measure
    times = np.array(sorted(src_b))
    c_strip = gb + a1
    if len(times):
        mass = np.array([src_b[t] for t in times])
        pref = np.concatenate([[0.0], np.cumsum(mass)])
        # all windows (t_i - 0, t_k]: batches i..k
        k = np.arange(len(times))
        strip = pref[k[None, :] + 1] - pref[k[:, None]]
        length = times[None, :] - times[:, None] + tau
        upper = k[None, :] >= k[:, None]
        ratio = np.where(upper, strip, 0.0) / (c_strip * np.where(upper, length, 1.0) * 1.01)
        worst = float(ratio.max())
    else:
        worst = 0.0
    rep.entries["source_strip"] = BoundEntry(worst, 1.0, detail=f"constant {c_strip}")
    # (c) total mass of the jump part
    up = 8.0 * c_strip * (1.0 / (cfg.kappa * family.beta) + 1.0 + T)
    rep.entries["jump_mass"] = BoundEntry(m.mu_jump.mass, up)
    rep.constants["jump_mass_lower_reference"] = c_strip * (1.0 / (cfg.kappa * family.beta) + T)
    # (d) xi against f'' times the source
    rep.entries["xi_vs_source"] = _batch_check(
        m.xi.positive_times().batches(), src_b, cfg.flux.f_second_bound * (1.0 + L))
    # (e) triangle inequality for the continuous part
    rep.entries["cont_triangle"] = BoundEntry(m.mu_cont.mass, m.mu.mass + m.mu_jump.mass + 1e-12)
    # (f) sizes at curve starts after t = 0
    log = run.log
    starts = 0.0
    drop_total = 0.0
    cancel_worst = 0.0
    for rec in log.records:
        if rec.type != COLLISION:
            continue
        d = rec.upsilon_drop or 0.0
        drop_total += max(d, 0.0)
        t_in = [f for f in rec.in_ids if family.is_traced(f)]
        t_out = [f for f in rec.out_ids if family.is_traced(f)]
        if t_out and not t_in:
            starts += math.fsum(abs(log.fronts[f].size) for f in t_out)
        qk = math.fsum(log.fronts[f].size for f in t_out) - math.fsum(log.fronts[f].size for f in t_in)
        if rec.cancellation and t_in and qk > 0:
            # (g) positive jump atoms at cancellations against the Upsilon drop
            cancel_worst = max(cancel_worst, qk / (2.0 * max(d, 1e-300)))
    rhs_f = family.beta / 4.0 * family.m_count + 4.0 / (cfg.kappa * family.beta) * drop_total
    rep.entries["curve_starts"] = BoundEntry(starts, rhs_f + 1e-12, enforced=False)
    rep.entries["cancellation_atoms"] = BoundEntry(cancel_worst, 1.0 + 1e-9)
    # (h) atoms of mu after t = 0 only at update times
    upd = set(run.update_times)
    stray = [t for t in pos.t.tolist() if t not in upd]
    rep.entries["mu_support"] = BoundEntry(float(len(stray)), 0.0,
                                           detail=f"atoms off update times: {stray[:5]}")
    if strict and not rep.passed:
        name = rep.failures()[0]
        raise BoundViolation(name, json.dumps(rep.entries[name].to_dict()))
    return rep
