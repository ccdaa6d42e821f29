"""Scalar Riemann problems solved through convex/concave envelopes.

For a jump ``u_l < u_r`` the entropy solution follows the lower convex
envelope of the flux on ``[u_l, u_r]``; for ``u_l > u_r`` the upper concave
envelope on ``[u_r, u_l]``. Linear pieces of the envelope are shocks, pieces
where the envelope touches the flux are rarefactions, which we replace by
a staircase of small jumps ("rarefaction steps") of size at most
``epsilon``. Every front travels at the Rankine-Hugoniot speed of its own
left/right states, so each front is an exact weak-solution discontinuity.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (DegenerateJump, InsufficientSamples, InvalidFlux,
                     StateOutOfRange)

__all__ = [
    "FluxModel",
    "Front",
    "WaveFan",
    "Envelope",
    "SHOCK",
    "RAREFACTION",
    "rankine_hugoniot_speed",
    "lower_convex_envelope",
    "solve_riemann",
    "burgers",
    "cubic",
    "quartic",
    "custom_table",
    "flux_from_spec",
]

SHOCK = "shock"
RAREFACTION = "rarefaction"


@dataclass(frozen=True)
class FluxModel:
    f: Callable[[float], float]
    f_prime: Callable[[float], float]
    f_second_bound: float
    convexity_const: float
    working_range: tuple[float, float]
    name: str = "custom"
    envelope_samples: int = 1024

    def __post_init__(self):
        lo, hi = self.working_range
        if not lo < hi:
            raise InvalidFlux("working_range must be a nonempty interval")
        if self.convexity_const > 0:
            z = np.linspace(lo, hi, 65)
            h = (hi - lo) / 64.0
            fp = np.array([self.f_prime(float(v)) for v in z])
            gaps = np.diff(fp)
            if np.any(gaps < self.convexity_const * h * (1 - 1e-9) - 1e-14):
                raise InvalidFlux(
                    f"flux {self.name!r} fails f'(z+h)-f'(z) >= c*h for c={self.convexity_const}")

    @property
    def uniformly_convex(self) -> bool:
        return self.convexity_const > 0

    @property
    def tol_u(self) -> float:
        lo, hi = self.working_range
        return 1e-12 * (hi - lo)

    def check_state(self, u: float) -> None:
        lo, hi = self.working_range
        slack = 1e-9 * (hi - lo)
        if not (lo - slack <= u <= hi + slack):
            raise StateOutOfRange(f"state {u!r} outside working range [{lo}, {hi}]")


@dataclass(frozen=True)
class Front:
    """A discontinuity moving at constant speed, anchored at ``(t0, x0)``."""

    id: int
    x0: float
    t0: float
    speed: float
    left: float
    right: float
    kind: str

    @property
    def size(self) -> float:
        return self.right - self.left

    def position(self, t: float) -> float:
        return self.x0 + self.speed * (t - self.t0)


@dataclass(frozen=True)
class WaveFan:
    fronts: tuple[Front, ...]

    def __len__(self):
        return len(self.fronts)

    def __iter__(self):
        return iter(self.fronts)

    @property
    def speeds(self) -> tuple[float, ...]:
        return tuple(fr.speed for fr in self.fronts)

    @property
    def sizes(self) -> tuple[float, ...]:
        return tuple(fr.size for fr in self.fronts)


def rankine_hugoniot_speed(u_l: float, u_r: float, flux: FluxModel) -> float:
    if abs(u_r - u_l) <= flux.tol_u:
        raise DegenerateJump(f"jump {u_l!r} -> {u_r!r} is below state tolerance")
    return (flux.f(u_r) - flux.f(u_l)) / (u_r - u_l)


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear envelope given by its vertices (sorted abscissae)."""

    u: tuple[float, ...]
    f: tuple[float, ...]
    indices: tuple[int, ...]

    def __call__(self, x):
        return np.interp(x, self.u, self.f)


def lower_convex_envelope(samples: Sequence[tuple[float, float]]) -> Envelope:
    """Lower convex hull of sampled points (monotone chain).

    Collinear interior points are dropped, so consecutive hull slopes are
    strictly increasing. ``indices`` are the positions of the retained
    vertices in the input sequence.
    """
    pts = [(float(a), float(b)) for a, b in samples]
    if len(pts) < 2:
        raise InsufficientSamples("need at least two samples")
    for (a, _), (b, _) in zip(pts, pts[1:]):
        if not a < b:
            raise InsufficientSamples("sample abscissae must be strictly increasing")
    hull: list[int] = []
    for i, (x, y) in enumerate(pts):
        while len(hull) >= 2:
            x1, y1 = pts[hull[-2]]
            x2, y2 = pts[hull[-1]]
            # pop the middle vertex unless it lies strictly below the chord
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return Envelope(tuple(pts[i][0] for i in hull), tuple(pts[i][1] for i in hull), tuple(hull))


def _staircase(a: float, b: float, epsilon: float) -> list[float]:
    """States a = s0, ..., sn = b with n = ceil(|b-a|/epsilon) equal increments."""
    n = max(1, math.ceil(abs(b - a) / epsilon * (1 - 1e-12)))
    h = (b - a) / n
    states = [a + k * h for k in range(n)]
    states.append(b)
    return states


def _envelope_waves(u_l: float, u_r: float, flux: FluxModel, epsilon: float) -> list[tuple[float, float, str]]:
    lo, hi = min(u_l, u_r), max(u_l, u_r)
    grid = np.linspace(lo, hi, flux.envelope_samples)
    grid[0], grid[-1] = lo, hi
    fv = np.array([flux.f(float(u)) for u in grid])
    sign = 1.0 if u_l < u_r else -1.0
    env = lower_convex_envelope(list(zip(grid, sign * fv)))
    idx = list(env.indices)
    # pieces in increasing-u order: (u_a, u_b, is_rarefaction)
    pieces: list[tuple[float, float, bool]] = []
    for i, k in zip(idx, idx[1:]):
        rare = k == i + 1
        a, b = float(grid[i]), float(grid[k])
        if rare and pieces and pieces[-1][2]:
            pieces[-1] = (pieces[-1][0], b, True)
        else:
            pieces.append((a, b, rare))
    if u_l > u_r:
        pieces = [(b, a, r) for a, b, r in reversed(pieces)]
    waves = []
    for a, b, rare in pieces:
        if rare:
            st = _staircase(a, b, epsilon)
            waves.extend((s0, s1, RAREFACTION) for s0, s1 in zip(st, st[1:]))
        else:
            waves.append((a, b, SHOCK))
    return waves


def _enforce_increasing(waves, flux):
    """Merge neighbouring waves until speeds strictly increase."""
    waves = [(l, r, k, rankine_hugoniot_speed(l, r, flux)) for l, r, k in waves]
    changed = True
    while changed:
        changed = False
        for i in range(len(waves) - 1):
            if waves[i][3] >= waves[i + 1][3]:
                l, r = waves[i][0], waves[i + 1][1]
                merged = []
                if abs(r - l) > flux.tol_u:
                    merged = [(l, r, SHOCK, rankine_hugoniot_speed(l, r, flux))]
                waves[i:i + 2] = merged
                changed = True
                break
    return waves


def solve_riemann(u_l: float, u_r: float, flux: FluxModel, epsilon: float,
                  x0: float = 0.0, t0: float = 0.0,
                  ids: Iterator[int] | None = None,
                  speed_perturbation: Callable[[], float] | None = None) -> WaveFan:
    """Front-tracking solution of the Riemann problem ``(u_l, u_r)`` at ``(t0, x0)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    flux.check_state(u_l)
    flux.check_state(u_r)
    if ids is None:
        ids = itertools.count()
    if abs(u_r - u_l) <= flux.tol_u:
        return WaveFan(())
    if flux.uniformly_convex:
        if u_l > u_r:
            raw = [(u_l, u_r, SHOCK)]
        else:
            st = _staircase(u_l, u_r, epsilon)
            raw = [(a, b, RAREFACTION) for a, b in zip(st, st[1:])]
    else:
        raw = _envelope_waves(u_l, u_r, flux, epsilon)
    waves = _enforce_increasing(raw, flux)
    fronts = []
    for l, r, kind, speed in waves:
        if speed_perturbation is not None:
            speed += speed_perturbation()
        fronts.append(Front(next(ids), x0, t0, speed, l, r, kind))
    return WaveFan(tuple(fronts))


# named fluxes

def burgers(working_range=(-10.0, 10.0)) -> FluxModel:
    return FluxModel(
        f=lambda u: 0.5 * u * u,
        f_prime=lambda u: u,
        f_second_bound=1.0,
        convexity_const=1.0,
        working_range=tuple(working_range),
        name="burgers",
    )


def cubic(working_range=(-2.0, 2.0)) -> FluxModel:
    """Nonconvex flux ``u**3`` with an inflection point at 0."""
    bound = 6.0 * max(abs(working_range[0]), abs(working_range[1]))
    return FluxModel(
        f=lambda u: u * u * u,
        f_prime=lambda u: 3.0 * u * u,
        f_second_bound=bound,
        convexity_const=0.0,
        working_range=tuple(working_range),
        name="cubic",
    )


def quartic(working_range=(-2.0, 2.0)) -> FluxModel:
    """``u**4 / 4``: convex but degenerate at 0."""
    m = max(abs(working_range[0]), abs(working_range[1]))
    return FluxModel(
        f=lambda u: 0.25 * u ** 4,
        f_prime=lambda u: u ** 3,
        f_second_bound=3.0 * m * m,
        convexity_const=0.0,
        working_range=tuple(working_range),
        name="quartic",
    )


def custom_table(u: Sequence[float] | str, fu: Sequence[float] | None = None) -> FluxModel:
    """Flux interpolated by a cubic spline through tabulated ``(u, f(u))``.

    ``u`` may instead be the path of a two-column CSV file.
    """
    from scipy.interpolate import CubicSpline

    if isinstance(u, str):
        with open(u, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
        u = [float(r[0]) for r in rows]
        fu = [float(r[1]) for r in rows]
    u = np.asarray(u, dtype=float)
    fu = np.asarray(fu, dtype=float)
    if u.size < 4:
        raise InvalidFlux("custom-table flux needs at least 4 samples")
    spline = CubicSpline(u, fu)
    d1, d2 = spline.derivative(1), spline.derivative(2)
    fine = np.linspace(u[0], u[-1], 4097)
    second = d2(fine)
    c = float(second.min())
    return FluxModel(
        f=lambda v: float(spline(v)),
        f_prime=lambda v: float(d1(v)),
        f_second_bound=float(np.abs(second).max()),
        convexity_const=c * (1 - 1e-6) if c > 0 else 0.0,
        working_range=(float(u[0]), float(u[-1])),
        name="custom-table",
    )


def flux_from_spec(spec) -> FluxModel:
    """Build a flux from a scenario entry (a name or ``{"name": ..., ...}``)."""
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec["name"]
    rng = spec.get("working_range")
    if name == "burgers":
        return burgers(rng or (-10.0, 10.0))
    if name == "cubic":
        return cubic(rng or (-2.0, 2.0))
    if name == "quartic":
        return quartic(rng or (-2.0, 2.0))
    if name == "custom-table":
        if "path" in spec:
            return custom_table(spec["path"])
        return custom_table(spec["u"], spec["f"])
    raise InvalidFlux(f"unknown flux {name!r}")
