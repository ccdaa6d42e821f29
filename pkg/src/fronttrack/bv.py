"""Piecewise-constant profiles, their derivative measures and BV functionals.

A :class:`Profile` is the state ``u(t, .)`` of a front-tracking
approximation: finitely many breakpoints with one constant value per cell.
Its distributional derivative is purely atomic, one atom per breakpoint,
and the functionals used for the interaction estimates (total variation,
interaction potential, Glimm functional, upward variation) are plain sums
over the jump sizes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidProfile, KappaOutOfRange, PositionNotFound

__all__ = [
    "Profile",
    "SignedAtomicMeasure1D",
    "FunctionalReadings",
    "BVDecomposition",
    "total_variation",
    "interaction_potential",
    "functionals_from_sizes",
    "glimm_functional",
    "derivative_measure",
    "split_measure",
    "cantor_proxy",
    "write_profile_csv",
    "read_profile_csv",
]


@dataclass(frozen=True)
class Profile:
    """Piecewise-constant function of ``x``.

    ``values[0]`` holds on ``(-inf, breakpoints[0])``, ``values[i]`` on
    ``[breakpoints[i-1], breakpoints[i])`` and ``values[-1]`` on the last
    half line. Equal adjacent values are merged on construction, so every
    stored breakpoint carries a nonzero jump.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        xs = tuple(float(x) for x in self.breakpoints)
        vs = tuple(float(v) for v in self.values)
        if len(vs) != len(xs) + 1:
            raise InvalidProfile(
                f"need {len(xs) + 1} values for {len(xs)} breakpoints, got {len(vs)}")
        if any(not math.isfinite(x) for x in xs) or any(not math.isfinite(v) for v in vs):
            raise InvalidProfile("profile entries must be finite")
        for a, b in zip(xs, xs[1:]):
            if not a < b:
                raise InvalidProfile(f"breakpoints not strictly increasing at {a!r}, {b!r}")
        mx, mv = [], [vs[0]]
        for x, v in zip(xs, vs[1:]):
            if v != mv[-1]:
                mx.append(x)
                mv.append(v)
        object.__setattr__(self, "breakpoints", tuple(mx))
        object.__setattr__(self, "values", tuple(mv))

    @classmethod
    def constant(cls, value: float) -> "Profile":
        return cls((), (value,))

    @property
    def jumps(self) -> tuple[float, ...]:
        v = self.values
        return tuple(v[i + 1] - v[i] for i in range(len(v) - 1))

    def __call__(self, x: float) -> float:
        """Value at ``x``; right-continuous at breakpoints."""
        lo, hi = 0, len(self.breakpoints)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.breakpoints[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        return self.values[lo]

    def shifted(self, dx: float) -> "Profile":
        return Profile(tuple(x + dx for x in self.breakpoints), self.values)

    @property
    def state_range(self) -> tuple[float, float]:
        return min(self.values), max(self.values)


def _interaction_sum(abs_sizes: Sequence[float]) -> float:
    q = 0.0
    acc = 0.0
    for s in abs_sizes:
        q += s * acc
        acc += s
    return q


def total_variation(p: Profile) -> float:
    return math.fsum(abs(s) for s in p.jumps)


def interaction_potential(p: Profile) -> float:
    """Sum over ordered pairs of distinct jumps of the product of their sizes."""
    return _interaction_sum([abs(s) for s in p.jumps])


@dataclass(frozen=True)
class FunctionalReadings:
    tv: float
    q: float
    upsilon: float
    tv_neg: float
    kappa: float


def functionals_from_sizes(sizes: Iterable[float], kappa: float) -> FunctionalReadings:
    """Functionals of a wave pattern given as an ordered list of front sizes.

    Fronts sharing a position (a fan at its birth instant) are counted as
    separate waves, which is the value the functionals take just after.
    """
    sizes = list(sizes)
    abs_sizes = [abs(s) for s in sizes]
    tv = math.fsum(abs_sizes)
    q = _interaction_sum(abs_sizes)
    tv_neg = math.fsum(s for s in sizes if s > 0)
    return FunctionalReadings(tv=tv, q=q, upsilon=tv + kappa * q, tv_neg=tv_neg, kappa=kappa)


def check_kappa(kappa: float, tv_bound: float) -> None:
    if not kappa > 0:
        raise KappaOutOfRange(f"kappa must be positive, got {kappa}")
    if tv_bound > 0 and not kappa < 1.0 / (8.0 * tv_bound):
        raise KappaOutOfRange(
            f"kappa={kappa} violates kappa < 1/(8M) = {1.0 / (8.0 * tv_bound)} for M={tv_bound}")


def glimm_functional(p: Profile, kappa: float, tv_bound: float | None = None) -> FunctionalReadings:
    """TV, Q, Upsilon = TV + kappa*Q and the upward variation of ``p``.

    ``tv_bound`` is the configured total-variation bound M; it defaults to
    TV(p) itself.
    """
    readings = functionals_from_sizes(p.jumps, kappa)
    check_kappa(kappa, readings.tv if tv_bound is None else tv_bound)
    return readings


@dataclass(frozen=True)
class SignedAtomicMeasure1D:
    """Finite signed measure on the line as sorted weighted atoms.

    Atoms given at the same position are summed; zero-weight atoms are
    kept only if passed explicitly (they carry no mass).
    """

    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        merged: list[list[float]] = []
        for x, w in sorted((float(x), float(w)) for x, w in self.atoms):
            if merged and merged[-1][0] == x:
                merged[-1][1] += w
            else:
                merged.append([x, w])
        object.__setattr__(self, "atoms", tuple((x, w) for x, w in merged))

    @property
    def positions(self) -> tuple[float, ...]:
        return tuple(x for x, _ in self.atoms)

    @property
    def mass(self) -> float:
        return math.fsum(abs(w) for _, w in self.atoms)

    @property
    def total(self) -> float:
        return math.fsum(w for _, w in self.atoms)

    def positive_part(self) -> "SignedAtomicMeasure1D":
        return SignedAtomicMeasure1D(tuple((x, w) for x, w in self.atoms if w > 0))

    def negative_part(self) -> "SignedAtomicMeasure1D":
        """The negative part as a nonnegative measure."""
        return SignedAtomicMeasure1D(tuple((x, -w) for x, w in self.atoms if w < 0))

    def restrict(self, intervals: Iterable[tuple[float, float]], tol: float = 0.0) -> "SignedAtomicMeasure1D":
        """Restriction to a union of closed intervals."""
        ivs = list(intervals)
        return SignedAtomicMeasure1D(tuple(
            (x, w) for x, w in self.atoms
            if any(a - tol <= x <= b + tol for a, b in ivs)))

    def evaluate(self, intervals: Iterable[tuple[float, float]], tol: float = 0.0) -> float:
        return self.restrict(intervals, tol).total


@dataclass(frozen=True)
class BVDecomposition:
    jump_part: SignedAtomicMeasure1D
    cont_part: SignedAtomicMeasure1D
    cantor_proxy: float = 0.0
    threshold: float | None = None


def derivative_measure(p: Profile) -> SignedAtomicMeasure1D:
    return SignedAtomicMeasure1D(tuple(zip(p.breakpoints, p.jumps)))


def split_measure(m: SignedAtomicMeasure1D, jump_positions: Iterable[float],
                  tol: float = 1e-12, beta: float | None = None,
                  m_atoms: int = 0) -> BVDecomposition:
    """Split ``m`` into the atoms sitting at ``jump_positions`` and the rest.

    Each requested position must match an atom of ``m`` within ``tol``.
    When ``beta`` is given, the continuous part's cantor proxy is filled in
    with the ``m_atoms`` largest sub-``beta`` atoms.
    """
    positions = m.positions
    chosen: set[int] = set()
    for y in jump_positions:
        hit = [i for i, x in enumerate(positions) if abs(x - y) <= tol]
        if not hit:
            raise PositionNotFound(f"no atom within {tol} of {y!r}")
        chosen.update(hit)
    jump = tuple(a for i, a in enumerate(m.atoms) if i in chosen)
    cont = tuple(a for i, a in enumerate(m.atoms) if i not in chosen)
    cont_m = SignedAtomicMeasure1D(cont)
    proxy = cantor_proxy(cont_m, beta, m_atoms) if beta is not None else 0.0
    return BVDecomposition(SignedAtomicMeasure1D(jump), cont_m, proxy, beta)


def cantor_proxy(m: SignedAtomicMeasure1D, beta: float, m_atoms: int) -> float:
    """Mass of the ``m_atoms`` heaviest atoms lighter than ``beta``.

    At a fixed resolution this measures how much non-jump variation can be
    concentrated on a few points. It stays bounded away from zero under
    refinement only if the limit derivative has a Cantor part.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if m_atoms <= 0:
        return 0.0
    small = sorted((abs(w) for _, w in m.atoms if abs(w) < beta), reverse=True)
    return math.fsum(small[:m_atoms])


def write_profile_csv(p: Profile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_left", "value"])
        w.writerow(["-inf", repr(p.values[0])])
        for x, v in zip(p.breakpoints, p.values[1:]):
            w.writerow([repr(x), repr(v)])


def read_profile_csv(path) -> Profile:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x_left", "value"]:
        raise InvalidProfile("profile CSV must start with header 'x_left,value'")
    body = [r for r in rows[1:] if r]
    if not body or body[0][0].strip() != "-inf":
        raise InvalidProfile("first profile row must use the '-inf' sentinel")
    values = [float(body[0][1])]
    xs = []
    for r in body[1:]:
        xs.append(float(r[0]))
        values.append(float(r[1]))
    return Profile(tuple(xs), tuple(values))
