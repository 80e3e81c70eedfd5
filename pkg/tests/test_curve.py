import pytest
from gmpy2 import mpq

from toprec.curve import (CurveError, IrrationalBranchPointError, SpectralCurve, analyze_poles, find_branch_points,
                          local_phi)
from toprec.exactnum import LaurentSeries, series_compose
from toprec.models import KontsevichTimes, build_kontsevich


def test_branch_points_of_standard_curves(airy, pure_gravity, swapped_gravity):
    assert airy.branch_locations == (0,)
    assert pure_gravity.branch_locations == (0,)
    assert sorted(swapped_gravity.branch_locations) == [-1, 1]
    k = build_kontsevich(KontsevichTimes({1: mpq(5, 3)}))
    assert k.branch_locations == (0,)


@pytest.mark.parametrize("name", ["airy", "pure_gravity", "swapped_gravity", "kontsevich_1111"])
def test_involution_properties(name, request):
    curve = request.getfixturevalue(name)
    T = 12
    for bp in find_branch_points(curve, T):
        s = bp.involution
        assert s[1] == -1 and s.val == 1
        back = series_compose(s, s)
        assert all(back[n] == (1 if n == 1 else 0) for n in range(back.prec))
        xs = bp.x_series
        t = LaurentSeries.monomial(1, 1)
        diff = series_compose(xs, s) - series_compose(xs, t)
        assert all(diff[n] == 0 for n in range(diff.prec))
        assert bp.omega.val == 2


def test_even_x_has_exact_involution(pure_gravity):
    s = pure_gravity.local(0, 16).involution
    assert s.coeffs == (-1,)


def test_omega_factor_is_odd(swapped_gravity):
    for bp in find_branch_points(swapped_gravity, 12):
        dy = bp.y_series - series_compose(bp.y_series, bp.involution)
        flipped = series_compose(dy, bp.involution)
        total = (flipped + dy)
        assert all(total[n] == 0 for n in range(total.prec))


def test_phi_examples(airy, pure_gravity):
    phi = local_phi(pure_gravity.local(0, 12))
    assert [phi[n] for n in range(8)] == [0, 0, 0, -2, 0, mpq(2, 5), 0, 0]
    phi = local_phi(airy.local(0, 8))
    assert [phi[n] for n in range(5)] == [0, 0, 0, mpq(2, 3), 0]


def test_irrational_branch_points_rejected():
    with pytest.raises(IrrationalBranchPointError):
        SpectralCurve.from_polynomials([0, -2, 0, 1], [0, 1]).branch_locations


def test_double_branch_point_rejected():
    with pytest.raises(CurveError):
        SpectralCurve.from_polynomials([0, 0, 0, 1], [0, 1]).validate()


def test_degenerate_kontsevich():
    with pytest.raises(CurveError):
        build_kontsevich(KontsevichTimes({3: 2}))


def test_constant_x_rejected():
    with pytest.raises(CurveError):
        SpectralCurve.from_polynomials([3], [0, 1]).validate()


@pytest.mark.parametrize("name", ["airy", "pure_gravity", "swapped_gravity", "kontsevich_1111"])
def test_temperatures_sum_to_zero(name, request):
    poles = analyze_poles(request.getfixturevalue(name))
    assert len(poles) == 1 and poles.poles[0].at_infinity
    assert poles.sum_temperatures() == 0


def test_temperature_of_rational_pole():
    # y dx with simple poles at 0 and infinity: x = z + 1/z, y = 1/z^2 style curve
    c = SpectralCurve.from_polynomials([1, 0, 1], [1], x_den=[0, 1], y_den=[0, 1])
    poles = analyze_poles(c)
    temps = [p.temperature for p in poles]
    assert sum(temps) == 0 and any(t != 0 for t in temps)
