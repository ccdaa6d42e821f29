"""Tracing of large discontinuities through the front graph.

A front qualifies if its size is at least ``beta/4``. Qualifying fronts are
chained across event nodes: at a node the leftmost qualifying incoming
front continues into the leftmost qualifying outgoing one, every other
incoming chain ends there and every other outgoing front starts a new
chain. A chain is kept when its size reaches ``beta`` somewhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import FamilyRunMismatch
from .tracking import EventLog

__all__ = [
    "PolygonalDiscontinuity",
    "JumpFamily",
    "CountBoundReport",
    "trace_discontinuities",
    "count_bound",
    "count_bound_report",
    "enrichment_holds",
]


@dataclass(frozen=True)
class PolygonalDiscontinuity:
    """One traced discontinuity: ``nodes[k] -> nodes[k+1]`` carries ``sizes[k]``."""

    front_ids: tuple[int, ...]
    nodes: tuple[tuple[float, float], ...]
    sizes: tuple[float, ...]
    node_records: tuple[int | None, ...]

    @property
    def peak_size(self) -> float:
        return max(abs(s) for s in self.sizes)

    @property
    def t_start(self) -> float:
        return self.nodes[0][0]

    @property
    def t_end(self) -> float:
        return self.nodes[-1][0]

    def position(self, t: float) -> float:
        for (t0, x0), (t1, x1) in zip(self.nodes, self.nodes[1:]):
            if t0 <= t <= t1:
                return x0 if t1 == t0 else x0 + (x1 - x0) * (t - t0) / (t1 - t0)
        raise ValueError(f"t={t} outside [{self.t_start}, {self.t_end}]")

    def to_dict(self) -> dict:
        return {"nodes": [list(n) for n in self.nodes], "sizes": list(self.sizes),
                "front_ids": list(self.front_ids)}


@dataclass
class JumpFamily:
    curves: list[PolygonalDiscontinuity]
    beta: float
    log: EventLog = field(repr=False)
    T: float = math.inf
    _traced: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for k, c in enumerate(self.curves):
            for fid in c.front_ids:
                self._traced[fid] = k

    @property
    def m_count(self) -> int:
        return len(self.curves)

    def is_traced(self, front_id: int) -> bool:
        return front_id in self._traced

    def curve_of(self, front_id: int) -> PolygonalDiscontinuity | None:
        k = self._traced.get(front_id)
        return None if k is None else self.curves[k]

    @property
    def traced_ids(self) -> frozenset[int]:
        return frozenset(self._traced)

    def involved_records(self) -> set[int]:
        """Indices of event records where a traced front starts or ends."""
        out = set()
        for fid in self._traced:
            out.add(self.log.born_at[fid])
            if fid in self.log.died_at:
                out.add(self.log.died_at[fid])
        return out

    def check_log(self, log: EventLog) -> None:
        if log is not self.log:
            raise FamilyRunMismatch("jump family was traced from a different run")

    def to_json(self) -> str:
        return json.dumps({"beta": self.beta, "curves": [c.to_dict() for c in self.curves]},
                          sort_keys=True)


def trace_discontinuities(log: EventLog | None, run=None, beta: float = 1.0) -> JumpFamily:
    """All maximal leftmost chains of fronts with size >= beta/4 peaking at >= beta.

    ``run`` supplies the final time; fronts alive at the end are cut there.
    """
    if log is None:
        log = run.log
    elif run is not None and run.log is not log:
        raise FamilyRunMismatch("log does not belong to the given run")
    T = run.T if run is not None else math.inf
    floor = 0.25 * beta * (1 - 1e-12)
    fronts = log.fronts

    def qualifies(fid):
        return abs(fronts[fid].size) >= floor

    chains: list[list[int]] = []
    chain_of: dict[int, int] = {}
    for rec in log.records:
        ins = [f for f in rec.in_ids if qualifies(f)]
        outs = [f for f in rec.out_ids if qualifies(f)]
        if not outs:
            continue
        if ins:
            k = chain_of[ins[0]]
            chains[k].append(outs[0])
            chain_of[outs[0]] = k
            rest = outs[1:]
        else:
            rest = outs
        for f in rest:
            chain_of[f] = len(chains)
            chains.append([f])
    curves = []
    for ch in chains:
        sizes = tuple(fronts[f].size for f in ch)
        if max(abs(s) for s in sizes) < beta * (1 - 1e-12):
            continue
        first = log.records[log.born_at[ch[0]]]
        nodes = [(first.t, first.x)]
        recs: list[int | None] = [first.index]
        for f in ch:
            d = log.died_at.get(f)
            if d is None:
                t_end = T if math.isfinite(T) else fronts[f].t0
                nodes.append((t_end, fronts[f].position(t_end)))
                recs.append(None)
            else:
                r = log.records[d]
                nodes.append((r.t, r.x))
                recs.append(d)
        curves.append(PolygonalDiscontinuity(tuple(ch), tuple(nodes), sizes, tuple(recs)))
    return JumpFamily(curves, beta, log, T)


def count_bound(kappa: float, growth_bound: float, beta: float, tv_datum: float) -> float:
    """``8 (delta_bar + G T) / (kappa beta^2) + TV(datum) / beta``."""
    return 8.0 * growth_bound / (kappa * beta * beta) + tv_datum / beta


@dataclass(frozen=True)
class CountBoundReport:
    m_count: int
    bound: float

    @property
    def passed(self) -> bool:
        return self.m_count <= self.bound

    def to_dict(self) -> dict:
        return {"m_count": self.m_count, "bound": self.bound, "pass": self.passed}


def count_bound_report(family: JumpFamily, config, tv_datum: float) -> CountBoundReport:
    b = count_bound(config.kappa, config.growth_bound, family.beta, tv_datum)
    return CountBoundReport(family.m_count, b)


def enrichment_holds(coarse: JumpFamily, fine: JumpFamily) -> bool:
    """Every front traced at the larger threshold is traced at the smaller one."""
    if fine.beta > coarse.beta:
        coarse, fine = fine, coarse
    return coarse.traced_ids <= fine.traced_ids
