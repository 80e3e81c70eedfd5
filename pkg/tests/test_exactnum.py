import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from toprec.exactnum import (Dual, LaurentSeries, Polynomial, Q, TruncationError, qstr, residue, series_arith,
                             series_compose, series_solve)

rationals = st.builds(lambda n, d: mpq(n, d), st.integers(-10**6, 10**6), st.integers(1, 10**4))
duals = st.builds(Dual, rationals, rationals)


@settings(max_examples=10_000, deadline=None)
@given(rationals, rationals, rationals)
def test_rational_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a


@settings(max_examples=10_000, deadline=None)
@given(duals, duals, duals)
def test_dual_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(duals, duals)
def test_dual_division_inverts_multiplication(a, b):
    if b.value == 0:
        with pytest.raises(ZeroDivisionError):
            b.inverse()
    else:
        assert (a * b) / b == a


def test_dual_product_rule():
    a, b, c, d = mpq(2), mpq(3), mpq(-5, 7), mpq(11)
    assert Dual(a, b) * Dual(c, d) == Dual(a * c, a * d + b * c)


@given(st.lists(rationals, min_size=1, max_size=7), rationals)
def test_dual_chain_rule_on_polynomials(coeffs, v):
    p = Polynomial.of(coeffs)
    out = Dual.lift(p(Dual.variable(v)))
    assert out.value == p(v)
    assert out.deriv == p.derivative()(v)


def test_rationals_are_reduced():
    r = Q("-6/4")
    assert (r.numerator, r.denominator) == (-3, 2)
    assert qstr(Q("10/5")) == "2"
    with pytest.raises(TypeError):
        Q(0.5)


def test_polynomial_trims_and_zero_degree():
    assert Polynomial.of([1, 2, 0, 0]).degree == 1
    assert Polynomial.of([0, 0]).degree == -1
    assert Polynomial.of([]).is_zero()


# ---------------------------------------------------------------- series


def _geometric(T):
    return LaurentSeries([mpq((-1) ** n) for n in range(T)], 0, T)


def test_geometric_inverse():
    T = 9
    prod = LaurentSeries.exact([1, 1]) * _geometric(T)
    assert prod.coeffs == (1,) and prod.prec == T


def test_pole_cancellation():
    s = LaurentSeries.exact([1, 1], -1) + LaurentSeries.exact([-1], -1)
    assert s.val == 0 and s.coeffs == (1,)


def test_division_shifts_valuation():
    a = LaurentSeries([3, 1], 2, 5)
    b = LaurentSeries.monomial(2, 1)
    q = series_arith(a, b, "div")
    assert q.val == 0 and q.coeffs == (3, 1) and q.prec == 3


def test_truncation_propagates_in_products():
    a = LaurentSeries([1, 2, 3], -1, 4)
    b = LaurentSeries([5, 7], 2, 6)
    p = a * b
    assert p.prec == min(4 + 2, 6 - 1)


def test_mismatched_centers_rejected():
    with pytest.raises(ValueError):
        LaurentSeries.exact([1], 0, mpq(1)) + LaurentSeries.exact([1], 0, mpq(2))


def test_division_by_zero_series():
    with pytest.raises(ZeroDivisionError):
        LaurentSeries.exact([1]) / LaurentSeries.zero(5)


series = st.builds(
    lambda cs, v, extra: LaurentSeries(cs, v, v + len(cs) + extra),
    st.lists(rationals, min_size=1, max_size=6), st.integers(-3, 3), st.integers(0, 3))


@given(series, series)
def test_mul_then_div_recovers(a, b):
    if b.is_zero():
        return
    r = (a * b) / b
    assert r.prec <= a.prec
    for n in range(min(a.val, r.val), r.prec):
        assert r[n] == a[n]


def test_compose_examples():
    t = LaurentSeries.monomial(1, 1)
    assert series_compose(LaurentSeries.monomial(2, 1), -t) == LaurentSeries.monomial(2, 1)
    inner = LaurentSeries.exact([1, 1], 1)
    out = series_compose(LaurentSeries.monomial(-1, 1), inner, prec=3)
    assert [out[n] for n in range(-1, 3)] == [1, -1, 1, -1]
    s = LaurentSeries([2, 0, 5], 1, 6)
    assert series_compose(t, s) == s


def test_compose_needs_positive_valuation():
    with pytest.raises(ValueError):
        series_compose(LaurentSeries.monomial(1, 1), LaurentSeries.exact([1, 1]))


def _involution_eq(xc, a):
    x = Polynomial.of(xc).shift(a)
    F = {}
    for i, c in enumerate(x.coeffs):
        if c and i:
            F[(i, 0)] = F.get((i, 0), 0) + c
            F[(0, i)] = F.get((0, i), 0) - c
    return x, F


def test_solve_even_x_gives_exact_sign_flip():
    _, F = _involution_eq([0, 0, 1], 0)
    s = series_solve(F, mpq(0), mpq(-1), 8)
    assert [s[n] for n in range(8)] == [0, -1] + [0] * 6


def test_solve_cubic_branch_point():
    _, F = _involution_eq([0, -3, 0, 1], 1)
    s = series_solve(F, mpq(0), mpq(-1), 6)
    assert (s[1], s[2]) == (-1, mpq(-1, 3))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=4), st.integers(-3, 3), st.integers(1, 4))
def test_solve_satisfies_equation(tail, a, c2):
    # x(a + t) = c2 t^2 + tail t^3 ..., a simple critical point at a
    shifted = Polynomial.of([0, 0, c2] + tail)
    back = shifted.shift(-a)
    _, F = _involution_eq(list(back.coeffs), a)
    T = 10
    s = series_solve(F, mpq(0), mpq(-1), T)
    xs = LaurentSeries.from_polynomial(shifted)
    t = LaurentSeries.monomial(1, 1)
    diff = (series_compose(xs, s) - series_compose(xs, t)).truncate(T + 1)
    assert all(diff[n] == 0 for n in range(T + 1))


def test_residue_examples():
    assert residue(LaurentSeries.exact([mpq(-1, 8)], -3)) == 0
    assert residue(LaurentSeries.exact([1, 0, 0, 0, 0, 0, 5], -1)) == 1
    with pytest.raises(TruncationError):
        residue(LaurentSeries([1], -3, -1))
