import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fronttrack.acceptance import _level_runs
from fronttrack.analysis.characteristics import (
    BALANCES,
    CharacteristicRegion,
    generalized_characteristic,
    random_regions,
    region_balance,
)
from fronttrack.analysis.oleinik import (
    check_schedule,
    exact_rarefaction_entry,
    exceptional_times,
    oleinik_constant,
    oleinik_two_sided,
    sample_oleinik,
)
from fronttrack.analysis.oracles import (
    burgers_riemann_pieces,
    damped_ramp_window_pieces,
    l1_to_piecewise_linear,
    oracle_burgers_riemann,
    oracle_damped_burgers_ramp,
)
from fronttrack.bv import Profile
from fronttrack.errors import Degenerate, OutOfRampRegion, OutOfWindow, ScheduleViolation
from fronttrack.jumps import trace_discontinuities
from fronttrack.measures import build_measures
from fronttrack.riemann import burgers, cubic
from fronttrack.splitting import SolverConfig, run

B = burgers()


def go(bps, vals, flux=B, trace_beta=0.5, **kw):
    """Run with the smallest admissible beta; trace jumps at ``trace_beta``."""
    base = dict(epsilon=0.1, tau=0.1, kappa=0.05, delta_bar=2.1, T=2.0, flux=flux,
                G_const=0.0, window=(-2.0, 3.0))
    base.update(kw)
    base["beta"] = 4 * (base["epsilon"] + base["delta_bar"] * base["tau"]) + 0.1
    art = run(SolverConfig(**base), Profile(tuple(bps), tuple(vals)))
    fam = trace_discontinuities(None, art, trace_beta)
    return art, fam, build_measures(art, fam)


# oracles

def test_burgers_oracle_values():
    assert oracle_burgers_riemann(1, 0, 2, 0.9) == 1
    assert oracle_burgers_riemann(0, 1, 1, 0.5) == 0.5
    assert oracle_burgers_riemann(0, 1, 1, 2) == 1


def test_damped_ramp_oracle_values():
    assert oracle_damped_burgers_ramp(0.9, math.log(2)) == pytest.approx(0.3)
    assert oracle_damped_burgers_ramp(0.4, 0.0) == pytest.approx(0.4)
    assert oracle_damped_burgers_ramp(0.0, 3.0) == 0.0
    with pytest.raises(OutOfRampRegion):
        oracle_damped_burgers_ramp(1.6, math.log(2))


def test_l1_distance_of_pieces():
    p = Profile((0.0,), (0.0, 1.0))
    assert l1_to_piecewise_linear(p, [(-1.0, 1.0, 0.0, 0.0)]) == pytest.approx(1.0)
    pieces = damped_ramp_window_pieces(math.log(2), -1.0, 3.0)
    assert pieces[1] == (0.0, 1.5, pytest.approx(1 / 3), 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 3), st.floats(-3, 3))
def test_burgers_pieces_agree_with_pointwise_oracle(ul, ur, t, x):
    if abs(x - 0.5 * (ul + ur) * t) < 1e-9:
        return
    for a, b, m, q in burgers_riemann_pieces(ul, ur, t, -4.0, 4.0):
        if a < x < b:
            assert m * x + q == pytest.approx(oracle_burgers_riemann(ul, ur, t, x), abs=1e-9)


# characteristics

def test_constant_state_characteristic_is_straight():
    art, _, _ = go([], [1.0])
    c = generalized_characteristic(art, (0.0, 0.0), 2.0)
    assert c.position(2.0) == pytest.approx(2.0)
    assert all(sg.slope == pytest.approx(1.0) for sg in c.segments)


def test_characteristic_sticks_to_standing_shock():
    art, _, _ = go([0], [1, -1])
    c = generalized_characteristic(art, (0.0, -0.5), 2.0)
    assert c.position(0.5) == pytest.approx(0.0)
    assert c.position(2.0) == pytest.approx(0.0)
    assert c.slopes_ok


def test_characteristic_inside_fan_follows_local_state():
    art, _, _ = go([0], [0, 1], epsilon=0.25, tau=0.25, delta_bar=1.1, T=2.0)
    c = generalized_characteristic(art, (1.0, 0.3), 2.0)
    assert c.slopes_ok
    for sg in c.segments:
        if sg.front_id is None and sg.t1 > sg.t0:
            tm, xm = 0.5 * (sg.t0 + sg.t1), 0.5 * (sg.x0 + sg.x1)
            assert sg.slope == pytest.approx(art.profile_at(tm)(xm))
    assert c.position(2.0) == pytest.approx(0.3 + 0.25)


def test_characteristic_out_of_window():
    art, _, _ = go([0], [1, 0])
    with pytest.raises(OutOfWindow):
        generalized_characteristic(art, (0.0, 0.0), 5.0)


def test_balances_around_a_shock():
    art, fam, m = go([0], [1, 0])
    reg = CharacteristicRegion.from_anchors(art, 0.2, 1.8, [(-0.5, 1.0)])
    rep = region_balance(art, reg, fam, m)
    assert set(rep.entries) == set(BALANCES)
    assert rep.passed and rep.phi_jump <= 1e-12
    assert rep.entries["evjump"]["lhs"] == pytest.approx(0.0, abs=1e-12)


def test_balance_inside_rarefaction_is_tight():
    art, fam, m = go([0], [0, 1], epsilon=0.25, tau=0.25, delta_bar=1.1, T=2.0)
    reg = CharacteristicRegion.from_anchors(art, 1.0, 2.0, [(0.2, 0.6)])
    rep = region_balance(art, reg, fam, m)
    assert rep.passed
    assert rep.entries["evcont"]["slack"] == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_random_regions_satisfy_balances(seed):
    art, fam, m = _merge_case()
    for reg in random_regions(art, 4, np.random.default_rng(seed), (-1.0, 3.0)):
        rep = region_balance(art, reg, fam, m)
        assert rep.passed, rep.to_dict()


_CACHE = {}


def _merge_case():
    if "m" not in _CACHE:
        _CACHE["m"] = go([0, 1], [2, 1, 0], tau=0.01, delta_bar=2.2, T=2.0)
    return _CACHE["m"]


# Oleinik-type bounds

def test_exact_fan_has_constant_one():
    e = exact_rarefaction_entry(1.0, [(0.2, 0.7)])
    assert e.C == pytest.approx(1.0) and e.passed


def test_oleinik_constant_edge_cases():
    assert oleinik_constant(0.0, 0.0) == 0.0
    assert oleinik_constant(1.0, 0.0) == math.inf
    assert oleinik_constant(1.0, 4.0) == 0.25


def test_pure_shock_has_zero_constant():
    art, fam, m = go([0], [1, 0])
    rep = oleinik_two_sided(art, 1.5, 0.5, [(-1.0, 2.0)], fam, m)
    assert rep.C == 0.0 and rep.passed
    rep = oleinik_two_sided(art, 0.5, 1.5, [(-1.0, 2.0)], fam, m)
    assert rep.C == 0.0


def test_rarefaction_constant_is_bounded():
    art, fam, m = go([0], [0, 1], epsilon=0.25, tau=0.25, delta_bar=1.1, T=2.0)
    rep = sample_oleinik(art, fam, m, np.random.default_rng(0), 20, (-0.5, 2.5))
    assert rep.passed and 0 < rep.C <= 1.0


def test_nonconvex_flux_is_degenerate():
    art, fam, m = go([0], [0.5, 0.0], flux=cubic())
    with pytest.raises(Degenerate):
        oleinik_two_sided(art, 1.0, 0.5, [(0.0, 1.0)], fam, m)


def test_schedule_checks():
    check_schedule([(0.1, 0.1, 0.9), (0.05, 0.05, 0.5)], 1.2)
    with pytest.raises(ScheduleViolation):
        check_schedule([(0.1, 0.1, 0.5)], 1.2)
    with pytest.raises(ScheduleViolation):
        check_schedule([(0.1, 0.1, 0.9), (0.1, 0.05, 0.9)], 1.2)
    with pytest.raises(ScheduleViolation):
        check_schedule([(0.05, 0.05, 0.5), (0.025, 0.025, 0.9)], 1.2)


def test_merge_time_is_the_only_flag():
    sc, levels = _level_runs("merging_shocks")
    rep = exceptional_times([a for _, a in levels], [c.beta for c, _ in levels])
    assert rep.flagged == [pytest.approx(1.0, abs=levels[-1][0].tau)]


def test_rarefaction_has_no_flags_and_decreasing_proxy():
    sc, levels = _level_runs("burgers_rarefaction")
    rep = exceptional_times([a for _, a in levels], [c.beta for c, _ in levels],
                            snapshot_times=sc.config.snapshot_times)
    assert rep.flagged == []
    assert rep.trend_ok and rep.cantor_trend


def test_exceptional_times_needs_matching_schedule():
    sc, levels = _level_runs("burgers_rarefaction")
    with pytest.raises(ScheduleViolation):
        exceptional_times([a for _, a in levels], [0.5])
