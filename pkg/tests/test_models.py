import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from toprec.exactnum import Polynomial
from toprec.models import (KontsevichTimes, PQError, PQModel, airy_f_series, airy_one_point_coefficients,
                           build_kontsevich, build_pq, build_pq_from_polynomials, build_quartic_onecut,
                           ising_polynomials, kontsevich_as_pq, pq_curve_matches, pq_poisson_check, pq_times,
                           quartic_onecut_curve, solve_Q)
from toprec.recursion import CorrelatorTable

small = st.builds(lambda n, d: mpq(n, d), st.integers(-6, 6), st.integers(1, 4))


def test_airy_f_series():
    f = airy_f_series(3)
    assert f[:2] == [1, mpq(-1, 4)]
    # f^2 + f'/(2p) = p^2 coefficientwise
    for k in range(1, 4):
        assert mpq(4 - 3 * k, 2) * f[k - 1] + sum(f[j] * f[k - j] for j in range(k + 1)) == 0
    with pytest.raises(ValueError):
        airy_f_series(-1)


def test_airy_one_point_from_recursion(airy_table):
    c = airy_one_point_coefficients(3)
    assert c == {1: mpq(1, 16), 2: mpq(105, 1024), 3: mpq(25025, 32768)}
    for g in (1, 2, 3):
        assert airy_table.W(1, g).terms == {((0, 6 * g - 2),): c[g]}


def test_pure_gravity_solutions():
    sols = solve_Q(PQModel(3, 2, {1: 3}))
    assert [s.coeffs for s in sols] == [(-2, 0, 1), (2, 0, 1)]
    curve = build_pq(PQModel(3, 2, {1: 3}))
    assert curve.y.num.coeffs == (0, -3, 0, 1)
    with pytest.raises(PQError):
        build_pq(PQModel(3, 2, {1: 3}), branch=5)


@settings(max_examples=15, deadline=None)
@given(small.filter(bool))
def test_pure_gravity_in_v(v):
    curve = build_pq_from_polynomials([-2 * v, 0, 1], [0, -3 * v, 0, 1], 3, 2)
    assert pq_times(curve.x.num, curve.y.num, 3, 2) == {1: 3 * v * v, 2: 0, 3: 0}
    ok, rem = pq_poisson_check(curve, 3, 2)
    assert ok, rem


def test_airy_as_pq():
    # the Airy pair Q = zeta^2 + t1, P = zeta has deg Q = 2, so it is the (1, 2) model here
    t1 = mpq(5, 7)
    curve = build_pq_from_polynomials([t1, 0, 1], [0, 1], 1, 2)
    assert pq_times(curve.x.num, curve.y.num, 1, 2) == {1: t1}
    built = build_pq(PQModel(1, 2, {1: t1}))
    assert built.x == curve.x and built.y == curve.y


@settings(max_examples=12, deadline=None)
@given(small, small, small)
def test_ising_times_and_poisson(v, w, t5):
    Qc, Pc = ising_polynomials(v, w, t5)
    times = pq_times(Polynomial.of(Qc, "zeta"), Polynomial.of(Pc, "zeta"), 4, 3)
    assert times[1] == 4 * v ** 3 + 6 * w ** 2
    assert times[2] == 6 * v * w
    assert times[5] == t5
    assert times.get(3, 0) == 0 and times.get(4, 0) == 0
    ok, rem = pq_poisson_check(build_pq_from_polynomials(Qc, Pc, 4, 3, check=False), 4, 3)
    assert ok, rem


def _ising_relation(x, y, v, w, t5):
    return (x ** 4 - y ** 3 - 4 * v ** 3 * x ** 2 + 3 * v ** 4 * y + 2 * v ** 6
            + 12 * w * v * (-x * y + v ** 2 * x) + 6 * w ** 2 * (-x ** 2 + 2 * v * y - 4 * v ** 3)
            + 8 * w ** 3 * x - 3 * w ** 4
            + 5 * t5 * (-x ** 2 * y - v ** 2 * x ** 2 + 2 * v ** 3 * y + 2 * v ** 5 - 2 * w * y * x
                        + 2 * v ** 2 * w * x + 3 * w ** 2 * y - 17 * v ** 2 * w ** 2)
            + mpq(25, 3) * t5 ** 2 * (v ** 2 * y + 2 * v ** 4 - 4 * v * w * x - 12 * v * w ** 2)
            + mpq(125, 27) * t5 ** 3 * (-x ** 2 + 2 * v ** 3 - 6 * w * x - 9 * w ** 2))


@settings(max_examples=12, deadline=None)
@given(small, small, small, small)
def test_ising_curve_relation(v, w, t5, z):
    Qc, Pc = ising_polynomials(v, w, t5)
    x, y = Polynomial.of(Qc)(z), Polynomial.of(Pc)(z)
    assert _ising_relation(x, y, v, w, t5) == 0


def test_pq_rejects_bad_input():
    with pytest.raises(PQError):
        PQModel(4, 2)
    with pytest.raises(PQError):
        PQModel(3, 2, {7: 1})
    with pytest.raises(PQError):
        build_pq_from_polynomials([0, 0, 1], [0, 1], 3, 2)


def test_kontsevich_truncation_is_pq():
    times = KontsevichTimes({1: mpq(2, 3), 3: mpq(1, 2), 5: mpq(3, 4)})
    model, c = kontsevich_as_pq(times)
    assert (model.p, model.q) == (3, 2)
    assert pq_curve_matches(build_kontsevich(times), model, c)


def test_odd_times_only_matter():
    full = KontsevichTimes({3: mpq(1, 3), 4: mpq(2, 5), 5: 1, 6: mpq(-1, 2), 7: mpq(1, 4)})
    F_full = CorrelatorTable(build_kontsevich(full)).F(2)
    F_odd = CorrelatorTable(build_kontsevich(full.odd_part())).F(2)
    assert F_full == F_odd


def test_quartic_family_members():
    curve = quartic_onecut_curve(mpq(1, 5)).validate()
    assert len(curve.branch_locations) == 2
    family = build_quartic_onecut()
    assert family.gamma(2) == mpq(-5, 2)
    with pytest.raises(ValueError):
        family.build(mpq(2))
