import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from toprec.models import KontsevichTimes, build_kontsevich, kontsevich_reference, pure_gravity_reference, \
    reference_tensor
from toprec.recursion import (CorrelatorTable, MultiDifferential, UnsupportedRegimeError, Pk_regularity_check,
                              check_phi_constant_independence, compute_F0, compute_F1_derivative, compute_W,
                              compute_W3_closed, pole_order_bound, sheet_sum_check)


@pytest.mark.parametrize("cell", [(3, 0), (1, 1), (2, 1), (1, 2)])
def test_pure_gravity_low_cells(pg_table, cell):
    ref = reference_tensor(*cell, pure_gravity_reference()[cell])
    assert (pg_table.W(*cell) - ref).is_zero()


def test_kontsevich_zero_times():
    times = KontsevichTimes({})
    table = CorrelatorTable(build_kontsevich(times))
    ref = kontsevich_reference(times)
    for cell in [(1, 1), (3, 0), (2, 1), (1, 2)]:
        assert (table.W(*cell) - reference_tensor(*cell, ref[cell])).is_zero(), cell
    assert table.W(1, 1).terms == {((0, 4),): mpq(-1, 16)}
    assert table.F(2) == ref["F2"] == 0


def test_unstable_cells(pg_table):
    assert pg_table.get(1, 0) is None
    assert pg_table.W(1, 0).is_zero()
    assert pg_table.W(2, 0).bergmann
    assert pg_table.W(2, 0).evaluate([mpq(3), mpq(1)]) == mpq(1, 4)
    with pytest.raises(ValueError):
        compute_W(pg_table, 0, 1)


@pytest.mark.parametrize("k,g", [(3, 0), (4, 0), (1, 1), (2, 1), (3, 1), (1, 2), (2, 2)])
def test_symmetric_and_bounded(k_table, k, g):
    W = k_table.W(k, g)
    assert W.is_symmetric()
    assert W.max_pole_order() <= pole_order_bound(k, g)
    for key in W.terms:
        assert all(d % 2 == 0 for _, d in key)


def test_odd_orders_appear_for_cubic_x(swapped_gravity):
    table = CorrelatorTable(swapped_gravity)
    W = table.W(1, 1)
    assert len(table.locations) == 2
    assert W.max_pole_order() == pole_order_bound(1, 1)


def test_closed_three_point_form(pure_gravity, swapped_gravity, kontsevich_1111):
    for curve in (pure_gravity, swapped_gravity, kontsevich_1111):
        assert (compute_W3_closed(curve) - CorrelatorTable(curve).W(3, 0)).is_zero()


@pytest.mark.parametrize("k,g", [(3, 0), (1, 1), (2, 1), (1, 2)])
def test_sheet_sum(pg_table, k, g):
    ok, witness = sheet_sum_check(pg_table, k, g)
    assert ok, witness


@pytest.mark.parametrize("k,g", [(1, 1), (2, 1), (0, 2), (1, 2)])
def test_loop_equation_regular(pg_table, k, g):
    ok, witness = Pk_regularity_check(pg_table, k, g)
    assert ok, witness


def test_free_energy_examples(pg_table, k_table, airy_table):
    assert pg_table.F(2) == mpq(7, 51840)
    assert k_table.F(2) == mpq(431, 960)
    assert airy_table.F(2) == 0
    assert check_phi_constant_independence(pg_table, 2, [mpq(1), mpq(-3, 7)])


def test_free_energy_regimes(pure_gravity, pg_table):
    with pytest.raises(UnsupportedRegimeError):
        pg_table.F(1)
    with pytest.raises(UnsupportedRegimeError):
        compute_F1_derivative(pure_gravity)
    assert compute_F0(build_kontsevich(KontsevichTimes({}))) == 0


def test_json_round_trip(k_table):
    W = k_table.W(2, 1)
    again = MultiDifferential.from_json_obj(2, 1, W.to_json_obj())
    assert again == W


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-30, 30).filter(bool), min_size=2, max_size=2))
def test_evaluation_matches_terms(pg_table, nums):
    W = pg_table.W(2, 1)
    pts = [mpq(n, 7) for n in nums]
    direct = sum(c * pts[0] ** -key[0][1] * pts[1] ** -key[1][1] for key, c in W.terms.items())
    assert W.evaluate(pts) == direct
