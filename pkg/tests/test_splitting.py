import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fronttrack.bv import Profile
from fronttrack.errors import ConfigInvalid, DomainViolation, InvalidSource
from fronttrack.riemann import burgers
from fronttrack.splitting import (
    SolverConfig,
    SourceModel,
    apply_source_step,
    damping_source,
    discretize_source,
    gaussian_source,
    run,
    source_from_spec,
    zero_source,
)
from fronttrack.tracking import EventLog, FrontState, init_from_datum

B = burgers()


def xsource(g, L=1.0, alpha_l1=0.0):
    return SourceModel(g=g, lipschitz_L=L, alpha=lambda x: 0.0, alpha_l1=alpha_l1)


def test_cell_average_of_x():
    assert discretize_source(xsource(lambda t, x, u: x + 0 * u, L=0.0), 1.0, 0.0, 0.3, 0) == pytest.approx(0.5)


def test_cell_average_of_sin_times_u():
    src = xsource(lambda t, x, u: np.sin(x) * u)
    assert discretize_source(src, math.pi, 0.0, 1.0, 0) == pytest.approx(2 / math.pi, abs=1e-13)


def test_damping_scales_constant_region():
    s = FrontState(0.1, (), 2.0)
    s2, _ = apply_source_step(s, damping_source(1.0), 0.1, 0.5, 0.1, B, EventLog())
    assert s2.left_state == pytest.approx(1.8) and s2.fronts == ()


def test_indicator_source_creates_jump_at_cell_boundary():
    src = xsource(lambda t, x, u: (np.asarray(x) > 0).astype(float), L=0.0, alpha_l1=1.0)
    s2, _ = apply_source_step(FrontState(0.1, (), 0.0), src, 0.1, 1.0, 0.1, B, EventLog(),
                              window=(-3.0, 3.0))
    p = s2.profile(0.1)
    assert p.breakpoints == (0.0,) and p.values == (0.0, pytest.approx(0.1))


def test_source_validation():
    with pytest.raises(InvalidSource):
        xsource(lambda t, x, u: 3 * u + 0 * x, L=1.0)
    with pytest.raises(InvalidSource):
        SourceModel(g=lambda t, x, u: 0 * x, lipschitz_L=0.0, alpha=lambda x: -1.0, alpha_l1=1.0)
    with pytest.raises(InvalidSource):
        source_from_spec({"name": "nope"})
    assert source_from_spec(None).name == "zero"
    assert source_from_spec({"name": "gaussian", "a": 0.2}).alpha_l1 == pytest.approx(0.4)


def test_gaussian_alpha_integral_matches_quadrature():
    src = gaussian_source(0.5, 0.5, 0.0, 1.0)
    num, _ = quad(src.alpha, -1.5, 2.0, points=[0.0])
    assert src.q(-1.5, 2.0) == pytest.approx(num, rel=1e-9)


def cfg(**kw):
    base = dict(epsilon=0.05, tau=0.05, beta=0.5, kappa=0.1, delta_bar=1.2, T=2.0, flux=B,
                G_const=0.0, window=(-1.0, 2.0))
    base.update(kw)
    return SolverConfig(**base)


def test_config_rejects_small_beta():
    c = cfg(beta=0.1, delta_bar=2.0)
    with pytest.raises(ConfigInvalid):
        c.validate()
    with pytest.raises(ConfigInvalid):
        cfg(tau=0.1).validate()
    with pytest.raises(ConfigInvalid):
        cfg(kappa=0.2).validate()


def test_default_G():
    c = cfg(G_const=None, source=gaussian_source(0.5, 0.5))
    assert c.G == pytest.approx(c.source.lipschitz_L * 2.2 + 2.0 + 1.0)


def test_run_rejects_datum_outside_domain():
    with pytest.raises(DomainViolation):
        run(cfg(delta_bar=1.2), Profile((0.0, 1.0), (0.0, 1.0, 0.0)))


def test_damped_run_update_bookkeeping():
    c = cfg(epsilon=2.0, tau=0.1, beta=10.0, kappa=0.01, delta_bar=2.1, T=0.1, G_const=0.1,
            source=damping_source(1.0))
    art = run(c, Profile((0.0,), (0.0, 2.0)))
    p = art.profile_at(0.1)
    assert p.values == (0.0, pytest.approx(1.8))
    assert all(u.passed for u in art.update_checks)


def test_zero_source_run_equals_plain_tracking():
    c = cfg()
    datum = Profile((0.0,), (1.0, 0.0))
    art = run(c, datum)
    assert art.profile_at(2.0) == Profile((1.0,), (1.0, 0.0))
    assert art.update_times == c.update_times()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=5), st.floats(0.1, 1.0))
def test_damping_step_scales_every_state(vals, c):
    vals = [v / 4 for v in vals]
    p = Profile(tuple(float(k) for k in range(len(vals) - 1)), tuple(vals))
    s = init_from_datum(p, B, 0.25, EventLog())
    s = FrontState(0.05, s.fronts, s.left_state)
    s2, _ = apply_source_step(s, damping_source(c), 0.05, 0.25, 0.05, B, EventLog())
    before = s.profile(0.05)
    after = s2.profile(0.05)
    for x in np.linspace(-1, len(vals), 37):
        # away from fronts the state is multiplied by 1 - c tau
        if all(abs(x - b) > 1e-3 for b in before.breakpoints + after.breakpoints):
            assert after(x) == pytest.approx((1 - 0.05 * c) * before(x), abs=1e-12)


def test_zero_source_is_exactly_zero():
    src = zero_source()
    assert discretize_source(src, 0.1, 0.0, 5.0, -3) == 0.0
