"""Exact solutions used as references, and exact L1 distances to them."""

from __future__ import annotations

import math
from typing import Sequence

from ..bv import Profile
from ..errors import OutOfRampRegion

__all__ = [
    "oracle_burgers_riemann",
    "oracle_damped_burgers_ramp",
    "burgers_riemann_pieces",
    "damped_ramp_pieces",
    "damped_ramp_window_pieces",
    "l1_to_piecewise_linear",
]


def oracle_burgers_riemann(u_l: float, u_r: float, t: float, x: float) -> float:
    """Entropy solution of Burgers' equation with a jump at the origin."""
    if t <= 0:
        raise ValueError("t must be positive")
    if u_l > u_r:
        return u_l if x < 0.5 * (u_l + u_r) * t else u_r
    return min(max(x / t, u_l), u_r)


def oracle_damped_burgers_ramp(x: float, t: float) -> float:
    """``u_t + (u^2/2)_x = -u`` from ``u(0, x) = x`` on the ramp ``[0, 1]``.

    Characteristics are ``x = x0 (2 - e^{-t})`` carrying ``x0 e^{-t}``.
    """
    if t < 0:
        raise OutOfRampRegion("negative time")
    width = 2.0 - math.exp(-t)
    if not -1e-12 <= x <= width + 1e-12:
        raise OutOfRampRegion(f"x={x} outside the ramp image [0, {width}] at t={t}")
    return x * math.exp(-t) / width


# a piece is (a, b, slope, intercept): the function m x + q on [a, b]

def burgers_riemann_pieces(u_l: float, u_r: float, t: float, a: float, b: float) -> list:
    if u_l > u_r:
        xs = 0.5 * (u_l + u_r) * t
        cuts = [(a, min(max(xs, a), b), 0.0, u_l), (min(max(xs, a), b), b, 0.0, u_r)]
    else:
        x1, x2 = min(max(u_l * t, a), b), min(max(u_r * t, a), b)
        cuts = [(a, x1, 0.0, u_l), (x1, x2, 1.0 / t, 0.0), (x2, b, 0.0, u_r)]
    return [c for c in cuts if c[1] > c[0]]


def damped_ramp_pieces(t: float) -> list:
    """The ramp part of the damped solution at time ``t``."""
    e = math.exp(-t)
    return [(0.0, 2.0 - e, e / (2.0 - e), 0.0)]


def damped_ramp_window_pieces(t: float, a: float, b: float) -> list:
    """The whole damped solution on ``[a, b]`` for the datum ``clamp(x, 0, 1)``.

    Left of the ramp the state stays 0; right of it the state 1 decays to
    ``e^{-t}``.
    """
    e = math.exp(-t)
    w = 2.0 - e
    cuts = [(a, min(max(0.0, a), b), 0.0, 0.0),
            (min(max(0.0, a), b), min(max(w, a), b), e / w, 0.0),
            (min(max(w, a), b), b, 0.0, e)]
    return [c for c in cuts if c[1] > c[0]]


def _abs_linear_integral(c: float, m: float, q: float, a: float, b: float) -> float:
    """Integral of ``|c - (m x + q)|`` over ``[a, b]``."""
    if b <= a:
        return 0.0
    h0 = c - (m * a + q)
    h1 = c - (m * b + q)
    if h0 * h1 >= 0:
        return 0.5 * (abs(h0) + abs(h1)) * (b - a)
    z = a + (b - a) * h0 / (h0 - h1)
    return 0.5 * abs(h0) * (z - a) + 0.5 * abs(h1) * (b - z)


def l1_to_piecewise_linear(p: Profile, pieces: Sequence[tuple[float, float, float, float]]) -> float:
    """Exact L1 distance between ``p`` and a piecewise-linear function on its pieces."""
    total = []
    for a, b, m, q in pieces:
        cuts = [a] + [x for x in p.breakpoints if a < x < b] + [b]
        for x0, x1 in zip(cuts, cuts[1:]):
            total.append(_abs_linear_integral(p(x0), m, q, x0, x1))
    return math.fsum(total)
