"""Operator splitting for ``u_t + f(u)_x = g(t, x, u)``.

On each slab ``(n tau, (n+1) tau)`` the homogeneous equation is advanced by
front tracking. At ``t = n tau`` every constant region is corrected by
``tau * g_j(t, u)``, where ``g_j`` is the average of ``g`` over the spatial
cell ``[j eps, (j+1) eps)``; the jumps of the corrected profile are solved
again as Riemann problems.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bv import FunctionalReadings, Profile, check_kappa, functionals_from_sizes
from .errors import (ConfigInvalid, DomainViolation, InvalidSource,
                     KappaOutOfRange, QuadratureFailure, TVBlowup)
from .riemann import FluxModel, Front, solve_riemann
from .tracking import (SOURCE, EventLog, EventRecord, FrontState, evolve,
                       init_from_datum)

__all__ = [
    "SourceModel",
    "SolverConfig",
    "TraceEntry",
    "UpdateCheck",
    "RunArtifacts",
    "zero_source",
    "damping_source",
    "gaussian_source",
    "source_from_spec",
    "discretize_source",
    "apply_source_step",
    "run",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class SourceModel:
    """Source ``g(t, x, u)`` with its Lipschitz constant and x-derivative bound.

    ``g`` must accept a numpy array for ``x``. ``alpha_integral(a, b)``
    returns the integral of ``alpha`` over ``[a, b]``; when omitted it is
    computed with the same Gauss rule used for ``g``.
    """

    g: Callable
    lipschitz_L: float
    alpha: Callable[[float], float]
    alpha_l1: float
    name: str = "custom"
    x_independent: bool = False
    alpha_integral: Callable[[float, float], float] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.lipschitz_L >= 0 and math.isfinite(self.lipschitz_L)):
            raise InvalidSource("Lipschitz constant must be finite and nonnegative")
        if not (self.alpha_l1 >= 0 and math.isfinite(self.alpha_l1)):
            raise InvalidSource("alpha must have finite L1 norm")
        xs = np.linspace(-2.0, 2.0, 9)
        us = np.linspace(-2.0, 2.0, 9)
        for x in xs:
            if self.alpha(float(x)) < 0:
                raise InvalidSource(f"alpha({x}) is negative")
            gv = np.array([float(np.asarray(self.g(0.0, x, float(u)))) for u in us])
            slope = np.abs(np.diff(gv)) / np.diff(us)
            if np.any(slope > self.lipschitz_L * (1 + 1e-9) + 1e-12):
                raise InvalidSource(f"g is not {self.lipschitz_L}-Lipschitz in u at x={x}")

    def q(self, a: float, b: float) -> float:
        """Integral of ``alpha`` over ``[a, b]``."""
        if self.alpha_l1 == 0:
            return 0.0
        if self.alpha_integral is not None:
            return float(self.alpha_integral(a, b))
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        vals = np.array([self.alpha(float(mid + half * z)) for z in _GL_NODES])
        return float(half * np.dot(_GL_WEIGHTS, vals))


def zero_source() -> SourceModel:
    return SourceModel(g=lambda t, x, u: 0.0 * np.asarray(x, dtype=float),
                       lipschitz_L=0.0, alpha=lambda x: 0.0, alpha_l1=0.0,
                       name="zero", x_independent=True)


def damping_source(c: float = 1.0) -> SourceModel:
    """``g = -c u``."""
    return SourceModel(g=lambda t, x, u: -c * u + 0.0 * np.asarray(x, dtype=float),
                       lipschitz_L=abs(c), alpha=lambda x: 0.0, alpha_l1=0.0,
                       name="damping", x_independent=True, params={"c": c})


def gaussian_source(c: float = 0.5, a: float = 0.5, x0: float = 0.0, w: float = 1.0) -> SourceModel:
    """``g = -c u + a exp(-((x - x0)/w)**2)``, with ``alpha = |g_x|``."""
    if w <= 0 or a < 0:
        raise InvalidSource("gaussian source needs w > 0 and a >= 0")

    def bump(x):
        return a * np.exp(-((np.asarray(x, dtype=float) - x0) / w) ** 2)

    def alpha(x):
        return float(abs(2.0 * (x - x0) / (w * w)) * bump(x))

    def alpha_integral(lo, hi):
        # integral of |h'| is the variation of the bump on [lo, hi]
        if lo <= x0 <= hi:
            return float(2 * bump(x0) - bump(lo) - bump(hi))
        return float(abs(bump(hi) - bump(lo)))

    lx = a * math.sqrt(2.0) / w * math.exp(-0.5)
    return SourceModel(g=lambda t, x, u: -c * u + bump(x), lipschitz_L=max(abs(c), lx),
                       alpha=alpha, alpha_l1=2.0 * a, name="gaussian",
                       alpha_integral=alpha_integral,
                       params={"c": c, "a": a, "x0": x0, "w": w})


def source_from_spec(spec) -> SourceModel:
    if spec is None:
        return zero_source()
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec["name"]
    kw = {k: v for k, v in spec.items() if k != "name"}
    if name == "zero":
        return zero_source()
    if name == "damping":
        return damping_source(**kw)
    if name == "gaussian":
        return gaussian_source(**kw)
    raise InvalidSource(f"unknown source {name!r}")


def discretize_source(source: SourceModel, epsilon: float, t: float, v: float, j: int) -> float:
    """Average of ``g(t, ., v)`` over the cell ``[j eps, (j+1) eps)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    a = j * epsilon
    if source.x_independent:
        val = float(np.asarray(source.g(t, a, v)))
    else:
        xs = a + 0.5 * epsilon * (_GL_NODES + 1.0)
        gv = np.broadcast_to(np.asarray(source.g(t, xs, v), dtype=float), xs.shape)
        val = 0.5 * float(np.dot(_GL_WEIGHTS, gv))
    if not math.isfinite(val):
        raise QuadratureFailure(f"g is not finite on cell {j} at t={t}, u={v}")
    return val


@dataclass
class SolverConfig:
    epsilon: float
    tau: float
    beta: float
    kappa: float
    delta_bar: float
    T: float
    flux: FluxModel
    source: SourceModel = field(default_factory=zero_source)
    G_const: float | None = None
    window: tuple[float, float] = (-5.0, 5.0)
    seed: int = 0
    perturb_speeds: bool = False
    snapshot_times: tuple[float, ...] = ()
    tol_x: float = 1e-12
    tv_slack: float = 1e-9

    @property
    def G(self) -> float:
        if self.G_const is not None:
            return self.G_const
        return self.source.lipschitz_L * (self.delta_bar + 1.0) + 2.0 * self.source.alpha_l1 + 1.0

    @property
    def growth_bound(self) -> float:
        """The bound delta_bar + G T on the Glimm functional."""
        return self.delta_bar + self.G * self.T

    def validate(self) -> None:
        if not (self.epsilon > 0 and self.T > 0):
            raise ConfigInvalid("epsilon and T must be positive")
        if not 0 < self.tau <= self.epsilon:
            raise ConfigInvalid(f"need 0 < tau <= epsilon, got tau={self.tau}, epsilon={self.epsilon}")
        need = 4.0 * (self.epsilon + self.growth_bound * self.tau)
        if not self.beta > need:
            raise ConfigInvalid(f"beta={self.beta} violates beta > 4(eps + (delta_bar+G T) tau) = {need}")
        try:
            check_kappa(self.kappa, self.growth_bound)
        except KappaOutOfRange as exc:
            raise ConfigInvalid(str(exc)) from None
        if self.G < 0 or self.delta_bar <= 0:
            raise ConfigInvalid("need delta_bar > 0 and G >= 0")
        if not self.window[0] < self.window[1]:
            raise ConfigInvalid("window must be a nonempty interval")

    def update_times(self) -> list[float]:
        n = int(math.floor(self.T / self.tau + 1e-9))
        return [k * self.tau for k in range(1, n + 1)]

    def echo(self) -> dict:
        return {
            "epsilon": self.epsilon, "tau": self.tau, "beta": self.beta,
            "kappa": self.kappa, "delta_bar": self.delta_bar, "T": self.T,
            "G": self.G, "flux": self.flux.name, "source": self.source.name,
            "source_params": dict(self.source.params), "window": list(self.window),
            "seed": self.seed, "perturb_speeds": self.perturb_speeds,
            "snapshot_times": list(self.snapshot_times),
        }


@dataclass(frozen=True)
class TraceEntry:
    t: float
    tv: float
    q: float
    upsilon: float
    tv_neg: float
    kind: str


@dataclass(frozen=True)
class UpdateCheck:
    """Measured TV change across one source update against its bound."""

    t: float
    tv_before: float
    tv_after: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.tv_after - self.tv_before <= self.bound * 1.01 + 1e-12


@dataclass
class RunArtifacts:
    config: SolverConfig
    datum: Profile
    log: EventLog
    final_state: FrontState
    trace: list[TraceEntry]
    update_times: list[float]
    pre_update: list[Profile]
    update_checks: list[UpdateCheck]
    left_states: list[tuple[float, float]]
    snapshots: dict[float, Profile] = field(default_factory=dict)

    def __post_init__(self):
        ids = sorted(self.log.fronts)
        self._ids = ids
        birth = np.array([self.log.records[self.log.born_at[i]].t for i in ids])
        death = np.array([self.log.end_time(i) for i in ids])
        self._birth, self._death = birth, death
        self._left_t = [t for t, _ in self.left_states]
        # fronts alive somewhere in each slab [b_k, b_{k+1})
        bounds = [0.0] + [t for t in self.update_times if 0.0 < t < self.config.T] + [self.config.T]
        self._bounds = bounds
        self._slabs = []
        for k in range(len(bounds) - 1):
            lo, hi = bounds[k], bounds[k + 1]
            self._slabs.append(np.nonzero((birth < hi) & (death > lo))[0])
        self._slabs.append(np.nonzero(death > bounds[-1])[0] if bounds[-1] > bounds[0]
                           else np.arange(len(ids)))
        ups = [e.upsilon for e in self.trace]
        self._trace_t = np.array([e.t for e in self.trace])
        drops = np.maximum(-np.diff(np.array(ups)), 0.0) if len(ups) > 1 else np.zeros(0)
        self._drop_cum = np.concatenate([[0.0], np.cumsum(drops)])

    @property
    def T(self) -> float:
        return self.config.T

    def slab_end(self, t: float) -> float:
        """First slab boundary strictly after ``t`` (or T)."""
        k = bisect.bisect_right(self._bounds, t)
        return self._bounds[k] if k < len(self._bounds) else self.config.T

    def fronts_at(self, t: float) -> list[Front]:
        """Fronts alive at ``t`` (born at or before, dying strictly after)."""
        k = min(bisect.bisect_right(self._bounds, t) - 1, len(self._slabs) - 1)
        cand = self._slabs[max(k, 0)]
        alive = cand[(self._birth[cand] <= t) & (self._death[cand] > t)]
        fr = [self.log.fronts[self._ids[i]] for i in alive]
        fr.sort(key=lambda f: (f.position(t), f.speed))
        return fr

    def death_time(self, front_id: int) -> float:
        return self.log.end_time(front_id)

    def left_state_at(self, t: float) -> float:
        k = bisect.bisect_right(self._left_t, t) - 1
        return self.left_states[max(k, 0)][1]

    def profile_at(self, t: float) -> Profile:
        """Right-continuous profile ``u(t, .)``."""
        return FrontState(t, tuple(self.fronts_at(t)), self.left_state_at(t)).profile(t)

    def profile_before_update(self, n: int) -> Profile:
        """``u(n tau -, .)`` for the ``n``-th update (1-based)."""
        return self.pre_update[n - 1]

    def readings_at(self, t: float) -> FunctionalReadings:
        return functionals_from_sizes([f.size for f in self.fronts_at(t)], self.config.kappa)

    def upsilon_negative_variation(self, s: float, t: float) -> float:
        """Sum of the decreases of Upsilon over trace entries with time in ``(s, t]``."""
        # drop k happens between entries k and k+1, at time trace[k+1].t
        lo = bisect.bisect_right(self._trace_t, s)
        hi = bisect.bisect_right(self._trace_t, t)
        lo, hi = max(lo, 1), max(hi, 1)
        if hi <= lo:
            return 0.0
        return float(self._drop_cum[hi - 1] - self._drop_cum[lo - 1])


def _cell_of(x_lo: float, x_hi: float, epsilon: float, jmin: int, jmax: int) -> int:
    if math.isinf(x_lo):
        return jmin
    if math.isinf(x_hi):
        return jmax
    j = math.floor(0.5 * (x_lo + x_hi) / epsilon)
    return min(max(j, jmin), jmax)


def apply_source_step(s: FrontState, source: SourceModel, tau: float, epsilon: float,
                      t_update: float, flux: FluxModel, log: EventLog | None = None,
                      window: tuple[float, float] = (-5.0, 5.0), tol_x: float = 1e-12,
                      speed_perturbation: Callable[[], float] | None = None,
                      ) -> tuple[FrontState, list[EventRecord]]:
    """Correct every constant region by ``tau * g_j`` and re-solve the jumps.

    Cells outside ``window`` use the value of the nearest window cell. A front
    lying exactly on a cell boundary keeps its position; the jump there is
    the combination of both effects.
    """
    if abs(s.time - t_update) > 1e-9 * max(1.0, abs(t_update)):
        raise ValueError(f"state time {s.time} differs from update time {t_update}")
    jmin = math.floor(window[0] / epsilon)
    jmax = math.ceil(window[1] / epsilon) - 1
    # group fronts by position: each group is one jump of the profile
    groups: list[tuple[float, list[Front]]] = []
    for fr in s.fronts:
        x = fr.position(t_update)
        if groups and abs(x - groups[-1][0]) <= tol_x:
            groups[-1][1].append(fr)
        else:
            groups.append((x, [fr]))
    points: list[tuple[float, list[Front]]] = list(groups)
    if not source.x_independent:
        front_x = [g[0] for g in groups]
        for j in range(jmin + 1, jmax + 1):
            xb = j * epsilon
            k = bisect.bisect_left(front_x, xb - tol_x)
            if k < len(front_x) and abs(front_x[k] - xb) <= tol_x:
                continue
            points.append((xb, []))
        points.sort(key=lambda p: p[0])
    # pre-update value on each piece and its cell
    pre_vals = [s.left_state]
    for _, frs in points:
        pre_vals.append(frs[-1].right if frs else pre_vals[-1])
    xs = [p[0] for p in points]
    edges = [-math.inf] + xs + [math.inf]
    post_vals = []
    for k, v in enumerate(pre_vals):
        j = _cell_of(edges[k], edges[k + 1], epsilon, jmin, jmax)
        post_vals.append(v + tau * discretize_source(source, epsilon, t_update, v, j))
    for k in range(1, len(post_vals)):
        if abs(post_vals[k] - post_vals[k - 1]) <= flux.tol_u:
            post_vals[k] = post_vals[k - 1]
    fronts: list[Front] = []
    records = []
    ids = log.ids if log is not None else None
    for k, (x, frs) in enumerate(points):
        a, b = pre_vals[k], pre_vals[k + 1]
        a2, b2 = post_vals[k], post_vals[k + 1]
        if a2 == a and b2 == b:
            fronts.extend(frs)
            continue
        fan = solve_riemann(a2, b2, flux, epsilon, x0=x, t0=t_update, ids=ids,
                            speed_perturbation=speed_perturbation)
        if not frs and not fan.fronts:
            continue
        fronts.extend(fan.fronts)
        rec = EventRecord(SOURCE, t_update, x, tuple(f.id for f in frs), tuple(f.id for f in fan),
                          tuple(f.size for f in frs), fan.sizes)
        if log is not None:
            log.append(rec, frs, fan.fronts)
        records.append(rec)
    return FrontState(t_update, tuple(fronts), post_vals[0]), records


def _make_perturbation(config: SolverConfig):
    if not config.perturb_speeds:
        return None
    rng = np.random.default_rng(config.seed)
    half = 0.5 * config.epsilon ** 3
    return lambda: float(rng.uniform(-half, half))


def run(config: SolverConfig, datum: Profile) -> RunArtifacts:
    """Front tracking with source corrections at every ``n tau <= T``."""
    config.validate()
    kappa = config.kappa
    init = functionals_from_sizes(datum.jumps, kappa)
    if init.upsilon > config.delta_bar * (1 + 1e-12):
        raise DomainViolation(f"Upsilon(datum)={init.upsilon} exceeds delta_bar={config.delta_bar}")
    for v in datum.values:
        config.flux.check_state(v)
    perturb = _make_perturbation(config)
    log = EventLog()
    state = init_from_datum(datum, config.flux, config.epsilon, log,
                            tv_bound=config.delta_bar, speed_perturbation=perturb)
    trace: list[TraceEntry] = []
    G = config.G
    slack = config.tv_slack * max(1.0, config.growth_bound)

    def record(t: float, r: FunctionalReadings, kind: str):
        if r.upsilon > config.delta_bar + G * t + slack:
            raise TVBlowup(f"Upsilon={r.upsilon} exceeds delta_bar + G t = "
                           f"{config.delta_bar + G * t} at t={t}")
        trace.append(TraceEntry(t, r.tv, r.q, r.upsilon, r.tv_neg, kind))

    record(0.0, state.readings(kappa), "initial")
    on_event = lambda t, r, rec: record(t, r, "collision")  # noqa: E731
    times = config.update_times()
    pre_update: list[Profile] = []
    checks: list[UpdateCheck] = []
    left_states = [(0.0, state.left_state)]
    src = config.source
    trivial = src.name == "zero"
    for tn in times:
        state, _ = evolve(state, tn, config.flux, config.epsilon, log, kappa,
                          config.tol_x, perturb, on_event=on_event)
        pre_update.append(state.profile())
        if trivial:
            continue
        tv_before = math.fsum(abs(v) for v in state.sizes)
        state, _ = apply_source_step(state, src, config.tau, config.epsilon, tn, config.flux,
                                     log, config.window, config.tol_x, perturb)
        tv_after = math.fsum(abs(v) for v in state.sizes)
        bound = config.tau * (src.lipschitz_L * tv_before + 2.0 * src.alpha_l1)
        checks.append(UpdateCheck(tn, tv_before, tv_after, bound))
        left_states.append((tn, state.left_state))
        record(tn, state.readings(kappa), "update")
    if state.time < config.T:
        state, _ = evolve(state, config.T, config.flux, config.epsilon, log, kappa,
                          config.tol_x, perturb, on_event=on_event)
    art = RunArtifacts(config, datum, log, state, trace, times, pre_update, checks, left_states)
    for t in config.snapshot_times:
        art.snapshots[float(t)] = art.profile_at(float(t))
    return art


def l1_distance_profiles(p: Profile, q: Profile, a: float | None = None, b: float | None = None) -> float:
    """L1 distance between two piecewise-constant profiles on ``[a, b]``."""
    xs = sorted(set(p.breakpoints) | set(q.breakpoints))
    lo = xs[0] if a is None and xs else a
    hi = xs[-1] if b is None and xs else b
    if lo is None or hi is None or hi <= lo:
        return 0.0
    cuts = [lo] + [x for x in xs if lo < x < hi] + [hi]
    return math.fsum(abs(p(x0) - q(x0)) * (x1 - x0) for x0, x1 in zip(cuts, cuts[1:]))


def integrate_profile(p: Profile, a: float, b: float) -> float:
    cuts = [a] + [x for x in p.breakpoints if a < x < b] + [b]
    return math.fsum(p(x0) * (x1 - x0) for x0, x1 in zip(cuts, cuts[1:]))

