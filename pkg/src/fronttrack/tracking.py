"""Event-driven front tracking for the homogeneous equation.

Fronts move on straight lines between events. The next event is the
earliest meeting of two adjacent fronts; it is resolved by solving the
Riemann problem between the outer states of all fronts meeting at that
point. Every creation and extinction of a front is written to an
:class:`EventLog`, which is the raw material for the jump tracing and the
balance measures.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .bv import FunctionalReadings, Profile, functionals_from_sizes, total_variation
from .errors import EventCountExceeded, InconsistentEvent, TVBoundExceeded
from .riemann import RAREFACTION, FluxModel, Front, solve_riemann

__all__ = [
    "FrontState",
    "CollisionEvent",
    "EventRecord",
    "EventLog",
    "INITIAL",
    "COLLISION",
    "SOURCE",
    "init_from_datum",
    "next_collision",
    "resolve_collision",
    "evolve",
]

INITIAL = "initial"
COLLISION = "collision"
SOURCE = "source"


@dataclass(frozen=True)
class FrontState:
    """Fronts sorted by position at ``time``; ``left_state`` is the far-left value."""

    time: float
    fronts: tuple[Front, ...]
    left_state: float

    def positions(self, t: float | None = None) -> list[float]:
        t = self.time if t is None else t
        return [fr.position(t) for fr in self.fronts]

    @property
    def sizes(self) -> list[float]:
        return [fr.size for fr in self.fronts]

    @property
    def right_state(self) -> float:
        return self.fronts[-1].right if self.fronts else self.left_state

    def profile(self, t: float | None = None) -> Profile:
        """Profile at ``t`` (default: the state time); coincident fronts merge."""
        t = self.time if t is None else t
        xs: list[float] = []
        vs = [self.left_state]
        for fr in self.fronts:
            x = fr.position(t)
            if xs and x <= xs[-1]:
                vs[-1] = fr.right
            else:
                xs.append(x)
                vs.append(fr.right)
        return Profile(tuple(xs), tuple(vs))

    def readings(self, kappa: float):
        return functionals_from_sizes(self.sizes, kappa)


@dataclass(frozen=True)
class CollisionEvent:
    t: float
    x: float
    incoming_ids: tuple[int, ...]
    incoming_sizes: tuple[float, ...]


@dataclass
class EventRecord:
    type: str
    t: float
    x: float
    in_ids: tuple[int, ...]
    out_ids: tuple[int, ...]
    in_sizes: tuple[float, ...]
    out_sizes: tuple[float, ...]
    tv_before: float | None = None
    tv_after: float | None = None
    upsilon_before: float | None = None
    upsilon_after: float | None = None
    predicted_drop: float | None = None
    cancellation: bool = False
    beta_involved: bool = False
    index: int = -1

    @property
    def tv_drop(self) -> float:
        if self.tv_before is not None:
            return self.tv_before - self.tv_after
        return math.fsum(abs(s) for s in self.in_sizes) - math.fsum(abs(s) for s in self.out_sizes)

    @property
    def upsilon_drop(self) -> float | None:
        if self.upsilon_before is None:
            return None
        return self.upsilon_before - self.upsilon_after

    def to_json(self) -> str:
        rec = {
            "type": self.type,
            "t": self.t,
            "x": self.x,
            "in_ids": list(self.in_ids),
            "out_ids": list(self.out_ids),
            "in_sizes": list(self.in_sizes),
            "out_sizes": list(self.out_sizes),
            "tv_drop": self.tv_drop,
            "upsilon_drop": self.upsilon_drop,
            "predicted_drop": self.predicted_drop,
            "beta_involved": self.beta_involved,
        }
        return json.dumps(rec, sort_keys=True)


@dataclass
class EventLog:
    """Time-ordered event records plus the birth/death of every front."""

    records: list[EventRecord] = field(default_factory=list)
    fronts: dict[int, Front] = field(default_factory=dict)
    born_at: dict[int, int] = field(default_factory=dict)
    died_at: dict[int, int] = field(default_factory=dict)
    _ids: Iterable[int] = field(default_factory=itertools.count, repr=False)

    @property
    def ids(self):
        return self._ids

    def append(self, rec: EventRecord, incoming: Iterable[Front], outgoing: Iterable[Front]) -> EventRecord:
        if self.records and rec.t < self.records[-1].t:
            raise InconsistentEvent(f"event at t={rec.t} logged after t={self.records[-1].t}")
        rec.index = len(self.records)
        self.records.append(rec)
        for fr in incoming:
            self.died_at[fr.id] = rec.index
        for fr in outgoing:
            self.fronts[fr.id] = fr
            self.born_at[fr.id] = rec.index
        return rec

    def end_time(self, front_id: int) -> float:
        i = self.died_at.get(front_id)
        return math.inf if i is None else self.records[i].t

    def collisions(self) -> list[EventRecord]:
        return [r for r in self.records if r.type == COLLISION]

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for r in self.records:
                fh.write(r.to_json() + "\n")


def init_from_datum(datum: Profile, flux: FluxModel, epsilon: float,
                    log: EventLog | None = None, tv_bound: float | None = None,
                    t0: float = 0.0,
                    speed_perturbation: Callable[[], float] | None = None) -> FrontState:
    """Solve one Riemann problem at every jump of ``datum``."""
    tv = total_variation(datum)
    if tv_bound is not None and tv > tv_bound * (1 + 1e-12):
        raise TVBoundExceeded(f"TV(datum)={tv} exceeds bound {tv_bound}")
    log = EventLog() if log is None else log
    fronts: list[Front] = []
    vals = datum.values
    for i, x in enumerate(datum.breakpoints):
        fan = solve_riemann(vals[i], vals[i + 1], flux, epsilon, x0=x, t0=t0,
                            ids=log.ids, speed_perturbation=speed_perturbation)
        log.append(EventRecord(INITIAL, t0, x, (), tuple(f.id for f in fan),
                               (), fan.sizes), (), fan.fronts)
        fronts.extend(fan.fronts)
    return FrontState(t0, tuple(fronts), vals[0])


def _meeting_time(a: Front, b: Front) -> float:
    """Time at which ``a`` (left) and ``b`` (right) meet, or inf."""
    dv = a.speed - b.speed
    if dv <= 0:
        return math.inf
    return (b.x0 - a.x0 + a.speed * a.t0 - b.speed * b.t0) / dv


def next_collision(s: FrontState, horizon: float, tol_x: float = 1e-12) -> CollisionEvent | None:
    """Earliest meeting of adjacent fronts no later than ``horizon``."""
    fr = s.fronts
    best = None
    for i in range(len(fr) - 1):
        t = _meeting_time(fr[i], fr[i + 1])
        if t == math.inf or t > horizon:
            continue
        t = max(t, s.time)
        key = (t, fr[i].position(t), fr[i].id)
        if best is None or key < best[0]:
            best = (key, i)
    if best is None:
        return None
    (t, _, _), i = best
    x = fr[i + 1].position(t)
    lo, hi = i, i + 1
    while lo > 0 and abs(fr[lo - 1].position(t) - x) <= tol_x:
        lo -= 1
    while hi + 1 < len(fr) and abs(fr[hi + 1].position(t) - x) <= tol_x:
        hi += 1
    group = fr[lo:hi + 1]
    return CollisionEvent(t, x, tuple(f.id for f in group), tuple(f.size for f in group))


def _predicted_drop(in_sizes, out_sizes, kappa: float) -> tuple[float, bool]:
    """Lower bound for the Upsilon drop and whether sizes cancelled."""
    tv_in = math.fsum(abs(v) for v in in_sizes)
    tv_out = math.fsum(abs(v) for v in out_sizes)
    if tv_out < tv_in - 1e-12 * max(1.0, tv_in):
        return 0.5 * (tv_in - tv_out), True
    a = [abs(v) for v in in_sizes]
    return kappa * math.fsum(a[i] * a[k] for i in range(len(a)) for k in range(i + 1, len(a))), False


def resolve_collision(s: FrontState, e: CollisionEvent, flux: FluxModel, epsilon: float,
                      log: EventLog | None = None, kappa: float = 0.0,
                      tol_x: float = 1e-12,
                      speed_perturbation: Callable[[], float] | None = None) -> FrontState:
    """Replace the fronts meeting at ``e`` by the Riemann fan of their outer states."""
    if e.t < s.time - 1e-12 * max(1.0, abs(s.time)):
        raise InconsistentEvent(f"state at t={s.time} already past event t={e.t}")
    ids = [f.id for f in s.fronts]
    try:
        lo = ids.index(e.incoming_ids[0])
    except ValueError:
        raise InconsistentEvent(f"front {e.incoming_ids[0]} not present") from None
    hi = lo + len(e.incoming_ids)
    if len(e.incoming_ids) < 2 or tuple(ids[lo:hi]) != tuple(e.incoming_ids):
        raise InconsistentEvent("incoming fronts are not adjacent in the state")
    incoming = s.fronts[lo:hi]
    scale = max(1.0, abs(e.x))
    if any(abs(f.position(e.t) - e.x) > max(tol_x, 1e-9 * scale) for f in incoming):
        raise InconsistentEvent("incoming fronts do not meet at the event point")
    if flux.uniformly_convex and all(f.kind == RAREFACTION and f.size > 0 for f in incoming):
        raise InconsistentEvent("rarefaction steps of a convex flux cannot collide")
    before = s.readings(kappa)
    fan = solve_riemann(incoming[0].left, incoming[-1].right, flux, epsilon,
                        x0=e.x, t0=e.t, ids=log.ids if log is not None else None,
                        speed_perturbation=speed_perturbation)
    fronts = s.fronts[:lo] + fan.fronts + s.fronts[hi:]
    new = FrontState(e.t, fronts, s.left_state)
    after = new.readings(kappa)
    in_sizes = tuple(f.size for f in incoming)
    predicted, cancellation = _predicted_drop(in_sizes, fan.sizes, kappa)
    if log is not None:
        log.append(EventRecord(
            COLLISION, e.t, e.x, e.incoming_ids, tuple(f.id for f in fan),
            in_sizes, fan.sizes, before.tv, after.tv, before.upsilon, after.upsilon,
            predicted, cancellation), incoming, fan.fronts)
    return new


def evolve(s: FrontState, t_end: float, flux: FluxModel, epsilon: float,
           log: EventLog | None = None, kappa: float = 0.0, tol_x: float = 1e-12,
           speed_perturbation: Callable[[], float] | None = None,
           max_events: int | None = None,
           on_event: Callable[[float, FunctionalReadings, EventRecord], None] | None = None,
           ) -> tuple[FrontState, list[EventRecord]]:
    """Resolve every collision up to ``t_end`` and return the state at ``t_end``.

    Produces the same events as repeated :func:`next_collision` /
    :func:`resolve_collision`, using a heap of adjacent meeting times and
    running sums for the functionals. ``on_event(t, readings, record)`` is
    called after each collision.
    """
    if t_end < s.time:
        raise ValueError(f"t_end={t_end} precedes state time {s.time}")
    log = EventLog() if log is None else log
    start = len(log.records)
    fr = {f.id: f for f in s.fronts}
    order = [f.id for f in s.fronts]
    nxt = dict(zip(order, order[1:] + [None]))
    prv = dict(zip(order, [None] + order[:-1]))
    head = order[0] if order else None
    tv = math.fsum(abs(f.size) for f in s.fronts)
    ss = math.fsum(f.size * f.size for f in s.fronts)
    up = math.fsum(f.size for f in s.fronts if f.size > 0)

    def readings():
        q = max(0.5 * (tv * tv - ss), 0.0)
        return FunctionalReadings(tv=tv, q=q, upsilon=tv + kappa * q, tv_neg=up, kappa=kappa)

    if max_events is None:
        k = kappa if kappa > 0 else 1.0
        max_events = int(readings().upsilon / (k * epsilon * epsilon)) + 4 * len(order) + 1000
    heap: list = []
    now = s.time

    def push(a, b):
        if a is None or b is None:
            return
        fa, fb = fr[a], fr[b]
        t = _meeting_time(fa, fb)
        if t == math.inf or t > t_end:
            return
        t = max(t, now)
        heapq.heappush(heap, (t, fa.position(t), a, b))

    for a in order[:-1]:
        push(a, nxt[a])
    count = 0
    while heap:
        t, _, a, b = heapq.heappop(heap)
        if a not in nxt or nxt[a] != b:
            continue
        x = fr[b].position(t)
        lo, hi = a, b
        while prv[lo] is not None and abs(fr[prv[lo]].position(t) - x) <= tol_x:
            lo = prv[lo]
        while nxt[hi] is not None and abs(fr[nxt[hi]].position(t) - x) <= tol_x:
            hi = nxt[hi]
        group = [lo]
        while group[-1] != hi:
            group.append(nxt[group[-1]])
        incoming = [fr[i] for i in group]
        now = t
        before = readings()
        fan = solve_riemann(incoming[0].left, incoming[-1].right, flux, epsilon,
                            x0=x, t0=t, ids=log.ids, speed_perturbation=speed_perturbation)
        in_sizes = tuple(f.size for f in incoming)
        tv += math.fsum(abs(v) for v in fan.sizes) - math.fsum(abs(v) for v in in_sizes)
        ss += math.fsum(v * v for v in fan.sizes) - math.fsum(v * v for v in in_sizes)
        up += math.fsum(v for v in fan.sizes if v > 0) - math.fsum(v for v in in_sizes if v > 0)
        after = readings()
        left, right = prv[lo], nxt[hi]
        for i in group:
            del nxt[i], prv[i], fr[i]
        new = [f.id for f in fan]
        for f in fan:
            fr[f.id] = f
        chain = [left] + new + [right]
        for u, v in zip(chain, chain[1:]):
            if u is not None:
                nxt[u] = v
            if v is not None:
                prv[v] = u
        if left is None:
            head = chain[1]
        for u, v in zip(chain, chain[1:]):
            push(u, v)
        predicted, cancellation = _predicted_drop(in_sizes, fan.sizes, kappa)
        rec = log.append(EventRecord(
            COLLISION, t, x, tuple(group), tuple(new), in_sizes, fan.sizes,
            before.tv, after.tv, before.upsilon, after.upsilon, predicted, cancellation),
            incoming, fan.fronts)
        if on_event is not None:
            on_event(t, after, rec)
        count += 1
        if count > max_events:
            raise EventCountExceeded(f"more than {max_events} collisions before t={t_end}")
    out = []
    i = head
    while i is not None:
        out.append(fr[i])
        i = nxt[i]
    return FrontState(t_end, tuple(out), s.left_state), log.records[start:]
