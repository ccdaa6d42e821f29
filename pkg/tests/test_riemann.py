import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fronttrack.analysis.oracles import burgers_riemann_pieces, l1_to_piecewise_linear
from fronttrack.errors import InsufficientSamples, InvalidFlux, StateOutOfRange
from fronttrack.riemann import (
    RAREFACTION,
    SHOCK,
    burgers,
    cubic,
    custom_table,
    flux_from_spec,
    lower_convex_envelope,
    quartic,
    rankine_hugoniot_speed,
    solve_riemann,
)
from fronttrack.tracking import FrontState

B = burgers()


@pytest.mark.parametrize("ul,ur,speed", [(1, 0, 0.5), (2, 0, 1.0), (0.3, 0.7, 0.5)])
def test_rankine_hugoniot(ul, ur, speed):
    assert rankine_hugoniot_speed(ul, ur, B) == pytest.approx(speed)


def test_envelope_of_convex_samples_is_unchanged():
    u = np.linspace(0, 1, 11)
    env = lower_convex_envelope([(x, x * x / 2) for x in u])
    assert env.u == tuple(u)


def test_envelope_of_tent_is_chord():
    env = lower_convex_envelope([(0, 0), (1, 1), (2, 0)])
    assert env.u == (0.0, 2.0) and env.f == (0.0, 0.0)


def test_envelope_of_cubic_matches_brute_force_hull():
    u = np.arange(-1.0, 1.0 + 1e-12, 0.25)
    pts = [(float(x), float(x ** 3)) for x in u]
    env = lower_convex_envelope(pts)
    # brute force: a sample is a hull vertex iff no chord passes strictly below it
    verts = []
    for k, (xk, yk) in enumerate(pts):
        below = False
        for i in range(k):
            for j in range(k + 1, len(pts)):
                xi, yi = pts[i]
                xj, yj = pts[j]
                if yi + (yj - yi) * (xk - xi) / (xj - xi) <= yk - 1e-15:
                    below = True
        if not below:
            verts.append(xk)
    assert list(env.u) == verts
    assert env.u[0] == -1.0 and env.u[1] == 0.5  # chord to the tangency sample, then f


def test_envelope_needs_two_samples():
    with pytest.raises(InsufficientSamples):
        lower_convex_envelope([(0, 0)])


def test_single_shock():
    fan = solve_riemann(1.0, 0.0, B, 0.25)
    assert len(fan) == 1 and fan.fronts[0].kind == SHOCK
    assert fan.fronts[0].speed == pytest.approx(0.5)


def test_two_step_rarefaction_and_its_error():
    fan = solve_riemann(0.0, 1.0, B, 0.5)
    assert [f.kind for f in fan] == [RAREFACTION, RAREFACTION]
    assert [(f.left, f.right) for f in fan] == [(0.0, 0.5), (0.5, 1.0)]
    assert fan.speeds == pytest.approx((0.25, 0.75))
    prof = FrontState(0.0, fan.fronts, 0.0).profile(1.0)
    err = l1_to_piecewise_linear(prof, burgers_riemann_pieces(0.0, 1.0, 1.0, -1.0, 2.0))
    assert err == pytest.approx(0.125, abs=1e-12)


def test_equal_states_give_empty_fan():
    assert len(solve_riemann(0.3, 0.3, B, 0.1)) == 0
    assert len(solve_riemann(0.3, 0.3, cubic(), 0.1)) == 0


def test_state_outside_working_range():
    with pytest.raises(StateOutOfRange):
        solve_riemann(11.0, 0.0, B, 0.1)


def test_flux_specs():
    assert flux_from_spec("burgers").name == "burgers"
    assert flux_from_spec({"name": "quartic"}).f_prime(2.0) == pytest.approx(8.0)
    with pytest.raises(InvalidFlux):
        flux_from_spec("nope")


def test_custom_table_matches_burgers():
    u = np.linspace(-2, 2, 41)
    fl = custom_table(u, u * u / 2)
    fan = solve_riemann(1.0, 0.0, fl, 0.1)
    assert len(fan) == 1 and fan.fronts[0].speed == pytest.approx(0.5, abs=1e-9)


def test_cubic_riemann_has_composite_wave():
    # u^3 from -1 to 1: an upward jump across the inflection gives steps then a contact-shock
    fan = solve_riemann(1.0, -1.0, cubic(), 0.1)
    assert len(fan) >= 2
    assert all(a <= b + 1e-12 for a, b in zip(fan.speeds, fan.speeds[1:]))


def _check_fan(ul, ur, fan, eps):
    if abs(ul - ur) < 1e-9:
        # negligible jumps may be dropped
        assert len(fan) <= 1
        return
    assert fan.fronts[0].left == ul and fan.fronts[-1].right == ur
    for a, b in zip(fan.fronts, fan.fronts[1:]):
        assert a.right == b.left
    assert all(a <= b + 1e-12 for a, b in zip(fan.speeds, fan.speeds[1:]))
    for f in fan:
        if f.kind == RAREFACTION:
            assert abs(f.size) <= eps * (1 + 1e-9)


state = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(state, state, st.sampled_from([0.05, 0.1, 0.25, 0.5]))
def test_burgers_fans_and_oracle_bound(ul, ur, eps):
    fan = solve_riemann(ul, ur, B, eps)
    _check_fan(ul, ur, fan, eps)
    prof = FrontState(0.0, fan.fronts, ul).profile(1.0)
    err = l1_to_piecewise_linear(prof, burgers_riemann_pieces(ul, ur, 1.0, -2.0, 2.0))
    assert err <= eps * abs(ur - ul) + 1e-12


@settings(max_examples=60, deadline=None)
@given(state, state, st.sampled_from([cubic(), quartic()]))
def test_nonconvex_fans_are_consistent(ul, ur, flux):
    fan = solve_riemann(ul, ur, flux, 0.1)
    _check_fan(ul, ur, fan, 0.1)
    for f in fan:
        if f.kind == SHOCK:
            assert f.speed == pytest.approx(rankine_hugoniot_speed(f.left, f.right, flux), abs=1e-9)
    assert math.isfinite(sum(fan.speeds))
