from dataclasses import replace

import pytest

from fronttrack.bv import Profile
from fronttrack.errors import BoundViolation, FamilyRunMismatch
from fronttrack.jumps import count_bound, count_bound_report, enrichment_holds, trace_discontinuities
from fronttrack.measures import (
    AtomicMeasure2D,
    build_measures,
    jump_balance_measure,
    split_derivative,
    verify_measure_bounds,
    wave_balance_measure,
)
from fronttrack.riemann import burgers, quartic
from fronttrack.splitting import SolverConfig, damping_source, run

B = burgers()


def go(bps, vals, **kw):
    base = dict(epsilon=0.1, tau=0.1, beta=0.9, kappa=0.1, delta_bar=1.1, T=1.0, flux=B,
                G_const=0.0, window=(-1.0, 3.0))
    base.update(kw)
    return run(SolverConfig(**base), Profile(tuple(bps), tuple(vals)))


def cancellation_run():
    # shock 1->0 from x=0 overtakes the step 0->0.5 at t=2, x=1
    return go([0, 0.5], [1, 0, 0.5], epsilon=0.5, tau=0.5, beta=6.0, kappa=0.05,
              delta_bar=1.6, T=3.0)


def test_count_bound_value_and_scaling():
    assert count_bound(0.05, 2.0, 0.25, 2.0) == pytest.approx(5128.0)
    a = count_bound(0.05, 2.0, 0.25, 0.0)
    assert count_bound(0.05, 2.0, 0.5, 0.0) == pytest.approx(a / 4)


def test_single_shock_is_one_curve():
    art = go([0], [1, 0])
    fam = trace_discontinuities(None, art, beta=0.5)
    (c,) = fam.curves
    assert c.nodes[0] == (0.0, 0.0)
    assert c.t_end == 1.0 and c.position(1.0) == pytest.approx(0.5)
    assert count_bound_report(fam, art.config, 1.0).passed


def test_small_shock_is_not_traced():
    art = go([0], [0.3, 0.0])
    assert trace_discontinuities(None, art, beta=0.5).m_count == 0


def test_merging_shocks_continue_leftmost():
    art = go([0, 1], [2, 1, 0], tau=0.01, beta=0.5, kappa=0.05, delta_bar=2.2, T=2.0)
    fam = trace_discontinuities(None, art, beta=0.5)
    assert fam.m_count == 2
    left, right = sorted(fam.curves, key=lambda c: c.nodes[0][1])
    assert right.t_end == pytest.approx(1.0)
    assert left.t_end == 2.0 and left.position(2.0) == pytest.approx(2.5)
    fine = trace_discontinuities(None, art, beta=0.25)
    assert enrichment_holds(fam, fine)


def test_family_from_other_run_is_rejected():
    a1, a2 = go([0], [1, 0]), go([0], [1, 0])
    fam = trace_discontinuities(None, a1, beta=0.5)
    with pytest.raises(FamilyRunMismatch):
        jump_balance_measure(a2, fam)
    with pytest.raises(FamilyRunMismatch):
        trace_discontinuities(a1.log, a2, beta=0.5)


def test_cancellation_bookkeeping():
    art = cancellation_run()
    fam = trace_discontinuities(None, art, beta=1.0)
    m = build_measures(art, fam)
    (rec,) = [r for r in art.log.records if r.cancellation]
    at = [(t, x) for t, x, _, _ in m.mu_jump.atoms() if t == rec.t]
    assert at == [(pytest.approx(2.0), pytest.approx(1.0))]
    assert [w for t, _, w, _ in m.mu_jump.atoms() if t == rec.t] == [pytest.approx(0.5)]
    assert [w for t, _, w, _ in m.mu_cont.atoms() if t == rec.t] == [pytest.approx(-0.5)]
    assert [w for t, _, w, _ in m.mu.atoms() if t == rec.t] == []


def test_absorbing_small_shock():
    art = go([0, 0.5], [1.2, 1.0, 0.0], delta_bar=1.3, kappa=0.05, beta=1.0, T=1.0)
    fam = trace_discontinuities(None, art, beta=1.0)
    (rec,) = [r for r in art.log.records if r.type == "collision"]
    assert rec.t == pytest.approx(5 / 6)
    mj = [w for t, _, w, _ in jump_balance_measure(art, fam).atoms() if t == rec.t]
    assert mj == [pytest.approx(-0.2)]


def test_shock_and_merge_leave_no_wave_balance():
    art = go([0], [1, 0])
    assert len(wave_balance_measure(art).positive_times()) == 0
    art = go([0, 1], [2, 1, 0], tau=0.01, beta=0.5, kappa=0.05, delta_bar=2.2, T=2.0)
    assert len(wave_balance_measure(art).positive_times()) == 0


def test_source_measure_of_shock_run():
    art = go([0], [1, 0])
    fam = trace_discontinuities(None, art, beta=0.9)
    m = build_measures(art, fam)
    b = m.mu_source.batches()
    assert sorted(b) == pytest.approx(art.update_times)
    assert all(v == pytest.approx(0.1) for v in b.values())


def test_damping_update_atom():
    art = go([0.0], [0.0, 2.0], epsilon=2.0, tau=0.1, beta=10.0, kappa=0.01, delta_bar=2.1,
             T=0.1, G_const=0.1, source=damping_source(1.0))
    ws = [w for t, _, w, _ in wave_balance_measure(art).atoms() if t == pytest.approx(0.1)]
    assert sum(ws) == pytest.approx(-0.2)


def test_quartic_weights():
    art = go([0], [2, 1], flux=quartic())
    fam = trace_discontinuities(None, art, beta=0.9)
    d = split_derivative(art, 0.5, fam, art.config.flux)
    assert [w for _, w in d.jump_part.atoms] == [pytest.approx(-7.0)]
    d = split_derivative(art, 0.5, fam)
    assert [w for _, w in d.jump_part.atoms] == [pytest.approx(-1.0)]


def test_bounds_pass_and_injected_atom_fails():
    art = go([0, 0.5], [1, 0, 0.5], epsilon=0.5, tau=0.5, beta=9.0, kappa=0.03,
             delta_bar=1.6, T=3.0, source=damping_source(0.2), G_const=0.5)
    fam = trace_discontinuities(None, art, beta=1.0)
    m = build_measures(art, fam)
    assert verify_measure_bounds(m, art, fam).passed
    t0 = art.update_times[0]
    bad = AtomicMeasure2D.from_atoms(m.mu.atoms() + [(t0, 0.0, 100.0, "update")])
    rep = verify_measure_bounds(replace(m, mu=bad), art, fam)
    assert not rep.passed and "mu_vs_source" in rep.failures()
    with pytest.raises(BoundViolation):
        verify_measure_bounds(replace(m, mu=bad), art, fam, strict=True)
