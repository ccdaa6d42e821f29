import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fronttrack.bv import Profile, total_variation
from fronttrack.errors import TVBoundExceeded
from fronttrack.riemann import burgers, cubic
from fronttrack.tracking import COLLISION, EventLog, FrontState, evolve, init_from_datum, next_collision

B = burgers()


def start(bps, vals, eps=0.1, flux=B):
    log = EventLog()
    return init_from_datum(Profile(tuple(bps), tuple(vals)), flux, eps, log), log


def test_two_shocks_merge():
    s, log = start([0, 1], [2, 1, 0])
    e = next_collision(s, 10.0)
    assert e.t == pytest.approx(1.0) and e.x == pytest.approx(1.5)
    s, recs = evolve(s, 2.0, B, 0.1, log, kappa=0.05)
    (rec,) = [r for r in log.records if r.type == COLLISION]
    assert rec.out_sizes == pytest.approx((-2.0,))
    assert rec.tv_before - rec.tv_after == pytest.approx(0.0, abs=1e-12)
    assert rec.upsilon_before - rec.upsilon_after == pytest.approx(0.05)
    (fr,) = s.fronts
    assert fr.position(2.0) == pytest.approx(2.5)


def test_shock_overtakes_step_with_cancellation():
    s, log = start([0, 0.5], [1, 0, 0.5], eps=0.5)
    s, _ = evolve(s, 3.0, B, 0.5, log, kappa=0.05)
    (rec,) = [r for r in log.records if r.type == COLLISION]
    assert (rec.t, rec.x) == (pytest.approx(2.0), pytest.approx(1.0))
    assert rec.cancellation
    (fr,) = s.fronts
    assert (fr.left, fr.right) == (1.0, 0.5) and fr.speed == pytest.approx(0.75)
    assert rec.tv_before - rec.tv_after == pytest.approx(1.0)


def test_step_and_shock_from_bump_collide():
    # step 0->1 and shock 1->0 both move at 1/2: parallel, never meet
    s, log = start([0, 1], [0, 1, 0], eps=1.0)
    assert next_collision(s, 100.0) is None
    s, log = start([0, 2], [0, 2, 0], eps=1.0)
    # steps 0->1 (speed 0.5) and 1->2 (speed 1.5), shock 2->0 at speed 1 from x=2
    e = next_collision(s, 100.0)
    assert e.t == pytest.approx(4.0) and e.x == pytest.approx(6.0)


def test_constant_datum_has_no_fronts():
    s, log = start([], [0.7])
    assert s.fronts == ()
    s2, recs = evolve(s, 5.0, B, 0.1, log)
    assert recs == [] and s2.profile(5.0) == Profile.constant(0.7)


def test_tv_bound_enforced():
    with pytest.raises(TVBoundExceeded):
        init_from_datum(Profile((0.0,), (0.0, 3.0)), B, 0.1, EventLog(), tv_bound=2.0)


def test_profile_reconstruction_is_right_continuous():
    s, _ = start([0], [1, 0])
    p = s.profile(1.0)
    assert p(0.5) == 0.0 and p(0.4999) == 1.0


datum_st = st.lists(st.integers(-8, 8), min_size=2, max_size=7).map(lambda v: [x / 8 for x in v])


@settings(max_examples=40, deadline=None)
@given(datum_st, st.sampled_from([B, cubic()]))
def test_functionals_never_increase(vals, flux):
    bps = tuple(np.linspace(-1, 1, len(vals) - 1)) if len(vals) > 1 else ()
    p = Profile(bps, tuple(float(v) for v in vals))
    tv0 = total_variation(p)
    kappa = 1.0 / (16.0 * max(tv0, 1.0))
    log = EventLog()
    s = init_from_datum(p, flux, 0.125, log)
    s, recs = evolve(s, 4.0, flux, 0.125, log, kappa=kappa)
    for r in recs:
        assert r.tv_after <= r.tv_before + 1e-9
        assert r.upsilon_after <= r.upsilon_before + 1e-9
    assert total_variation(s.profile(4.0)) <= tv0 + 1e-9
    # end states are conserved by the front structure
    assert s.left_state == p.values[0] and s.right_state == pytest.approx(p.values[-1])
