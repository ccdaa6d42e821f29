import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fronttrack.bv import (
    Profile,
    SignedAtomicMeasure1D,
    cantor_proxy,
    check_kappa,
    derivative_measure,
    functionals_from_sizes,
    glimm_functional,
    interaction_potential,
    read_profile_csv,
    split_measure,
    total_variation,
    write_profile_csv,
)
from fronttrack.errors import InvalidProfile, KappaOutOfRange, PositionNotFound


def steps(values, breakpoints=None):
    if breakpoints is None:
        breakpoints = tuple(float(i) for i in range(len(values) - 1))
    return Profile(tuple(breakpoints), tuple(values))


@pytest.mark.parametrize("values,tv", [([0, 1, 0], 2.0), ([5], 0.0), ([0, 0.25, 0.5, 0.75, 1], 1.0)])
def test_total_variation(values, tv):
    assert total_variation(steps(values)) == tv


@pytest.mark.parametrize("values,q", [([0, 1, 0], 1.0), ([0, 1, 2], 1.0), ([0, 1, 0, 1], 3.0)])
def test_interaction_potential(values, q):
    assert interaction_potential(steps(values)) == q


def test_glimm_functional_readings():
    r = glimm_functional(steps([0, 1, 0]), 0.05)
    assert (r.tv, r.q, r.upsilon, r.tv_neg) == (2.0, 1.0, pytest.approx(2.05), 1.0)
    r = glimm_functional(steps([2, 1, 0]), 0.05)
    assert (r.tv, r.q, r.tv_neg) == (2.0, 1.0, 0.0)
    assert r.upsilon == pytest.approx(2.05)
    r = glimm_functional(Profile.constant(3.0), 0.05)
    assert (r.tv, r.q, r.upsilon, r.tv_neg) == (0.0, 0.0, 0.0, 0.0)


def test_kappa_range():
    check_kappa(0.05, 2.0)
    with pytest.raises(KappaOutOfRange):
        check_kappa(0.07, 2.0)
    with pytest.raises(KappaOutOfRange):
        check_kappa(0.0, 2.0)


def test_profile_right_continuous_and_merging():
    p = Profile((0.0, 1.0, 2.0), (0.0, 1.0, 1.0, 0.0))
    assert p.breakpoints == (0.0, 2.0)
    assert p(-1) == 0.0 and p(0.0) == 1.0 and p(1.999) == 1.0 and p(2.0) == 0.0
    with pytest.raises(InvalidProfile):
        Profile((1.0, 0.0), (0.0, 1.0, 2.0))
    with pytest.raises(InvalidProfile):
        Profile((0.0,), (1.0,))


def test_derivative_measure():
    m = derivative_measure(steps([0, 1, 0], [1, 2]))
    assert m.atoms == ((1.0, 1.0), (2.0, -1.0))
    assert derivative_measure(Profile.constant(2.0)).atoms == ()
    m = derivative_measure(steps([0, 0.5, 1], [0, 1]))
    assert m.atoms == ((0.0, 0.5), (1.0, 0.5)) and m.mass == 1.0


def test_split_measure():
    m = SignedAtomicMeasure1D(((1.0, 1.0), (2.0, -1.0)))
    d = split_measure(m, {2.0})
    assert d.jump_part.atoms == ((2.0, -1.0),) and d.cont_part.atoms == ((1.0, 1.0),)
    d = split_measure(m, set())
    assert d.jump_part.atoms == () and d.cont_part.atoms == m.atoms
    d = split_measure(m, {1.0, 2.0})
    assert d.cont_part.atoms == ()
    with pytest.raises(PositionNotFound):
        split_measure(m, {1.5})


def test_cantor_proxy():
    m = SignedAtomicMeasure1D(((1.0, 1.0), (2.0, -0.1), (3.0, 0.05)))
    assert cantor_proxy(m, 0.5, 2) == pytest.approx(0.15)
    assert cantor_proxy(m, 0.5, 0) == 0.0
    assert cantor_proxy(m, 0.01, 5) == 0.0


def test_measure_parts_and_restriction():
    m = SignedAtomicMeasure1D(((0.0, 1.0), (1.0, -2.0), (1.0, 0.5), (3.0, 0.25)))
    assert m.atoms == ((0.0, 1.0), (1.0, -1.5), (3.0, 0.25))
    assert m.positive_part().mass == 1.25
    assert m.negative_part().mass == 1.5
    assert m.evaluate([(0.5, 3.0)]) == -1.25


def test_profile_csv_roundtrip(tmp_path):
    p = Profile((-0.5, 0.25, 2.0), (1.0, -0.1, 0.3, 0.0))
    path = tmp_path / "p.csv"
    write_profile_csv(p, path)
    assert path.read_text().splitlines()[:2] == ["x_left,value", "-inf,1.0"]
    assert read_profile_csv(path) == p


def test_profile_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("x,v\n-inf,1\n")
    with pytest.raises(InvalidProfile):
        read_profile_csv(path)


values_st = st.lists(st.floats(-3, 3, allow_nan=False, allow_infinity=False), min_size=1, max_size=12)


@settings(max_examples=80, deadline=None)
@given(values_st)
def test_functionals_properties(values):
    p = steps(values)
    tv = total_variation(p)
    q = interaction_potential(p)
    assert tv == pytest.approx(math.fsum(abs(j) for j in p.jumps))
    assert -1e-12 <= q <= 0.5 * tv * tv + 1e-9
    kappa = 1.0 / (16.0 * max(tv, 1.0))
    r = glimm_functional(p, kappa)
    assert r.upsilon == pytest.approx(tv + kappa * q)
    assert r.tv_neg <= tv + 1e-12
    assert derivative_measure(p).total == pytest.approx(p.values[-1] - p.values[0], abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=0, max_size=10))
def test_sizes_and_profile_agree(sizes):
    sizes = [s for s in sizes if s != 0.0]
    vals = [0.0]
    for s in sizes:
        vals.append(vals[-1] + s)
    r = functionals_from_sizes(sizes, 0.02)
    assert r.tv == pytest.approx(math.fsum(abs(s) for s in sizes))
    assert r.tv_neg == pytest.approx(math.fsum(s for s in sizes if s > 0))


@settings(max_examples=60, deadline=None)
@given(values_st, st.data())
def test_split_is_partition(values, data):
    m = derivative_measure(steps(values))
    chosen = data.draw(st.sets(st.sampled_from(m.positions))) if m.atoms else set()
    d = split_measure(m, chosen)
    assert len(d.jump_part.atoms) + len(d.cont_part.atoms) == len(m.atoms)
    assert d.jump_part.total + d.cont_part.total == pytest.approx(m.total, abs=1e-12)
