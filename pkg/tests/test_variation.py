import pytest
from gmpy2 import mpq

from toprec.curve import CurveError, RationalFunction
from toprec.models import PURE_GRAVITY_DFDT1, build_quartic_onecut
from toprec.recursion import CorrelatorTable
from toprec.specfile import curve_from_spec, load_preset_spec
from toprec.variation import (ModulusError, SymplecticTransform, apply_transform, direction_for_modulus,
                              free_energy_derivative, homogeneity_check, loop_insertion_check, moduli_derivative,
                              singular_limit_check)


@pytest.mark.parametrize("g", [0, 1, 2])
def test_moduli_derivative_pure_gravity(pure_gravity, g):
    r = moduli_derivative(pure_gravity, g, ("inf", 1), allow_combination=True)
    assert r.agrees, (r.dual_side, r.residue_side)
    if g in PURE_GRAVITY_DFDT1:
        # t_{inf,1} = -t_1 on this parametrisation
        assert r.dual_side == -PURE_GRAVITY_DFDT1[g]


@pytest.mark.parametrize("k,expected", [(3, mpq(705, 128)), (5, mpq(397, 128)), (7, mpq(203, 128))])
def test_moduli_derivative_kontsevich(kontsevich_1111, k, expected):
    r = moduli_derivative(kontsevich_1111, 2, ("inf", k), allow_combination=True)
    assert r.agrees and r.dual_side == expected


def test_modulus_needs_combination(pure_gravity):
    with pytest.raises(ModulusError):
        direction_for_modulus(pure_gravity, ("inf", 1))
    combo = direction_for_modulus(pure_gravity, ("inf", 1), allow_combination=True)
    assert len(combo) > 1


def test_f1_derivative_along_t3():
    spec = load_preset_spec("kontsevich-zero")
    for t3 in (mpq(0), mpq(1, 3), mpq(-5, 2)):
        spec["parameters"]["t3"] = str(t3)
        curve = curve_from_spec(spec, dual="t3")
        assert free_energy_derivative(curve, 1) == 1 / (24 * (2 - t3))


@pytest.mark.parametrize("name", ["pure_gravity", "kontsevich_1111"])
def test_homogeneity(name, request):
    ok, (lhs, rhs) = homogeneity_check(request.getfixturevalue(name), 2)
    assert ok, (lhs, rhs)


@pytest.mark.parametrize("k,g", [(0, 2), (1, 1), (2, 0)])
def test_loop_insertion(pure_gravity, k, g):
    ok, witness = loop_insertion_check(pure_gravity, k, g)
    assert ok, witness


def test_symplectic_invariance(pure_gravity):
    base = CorrelatorTable(pure_gravity).F(2)
    transforms = [SymplecticTransform("add_rational_of_x", RationalFunction.of([mpq(1), mpq(-2), mpq(3)])),
                  SymplecticTransform("scale", mpq(-4, 5)),
                  SymplecticTransform("negate_x"),
                  SymplecticTransform("swap_xy")]
    for T in transforms:
        assert CorrelatorTable(apply_transform(pure_gravity, T)).F(2) == base, T.kind


def test_transform_validation():
    with pytest.raises(ValueError):
        SymplecticTransform("rotate")
    with pytest.raises(ValueError):
        SymplecticTransform("scale", 0)
    with pytest.raises(ValueError):
        SymplecticTransform("add_rational_of_x", 3)


def test_swap_can_leave_the_rational_regime(kontsevich_1111):
    with pytest.raises(CurveError):
        apply_transform(kontsevich_1111, SymplecticTransform("swap_xy"))


def test_singular_limit_rejects_bad_samples():
    family = build_quartic_onecut()
    with pytest.raises(ValueError):
        singular_limit_check(family, 2, [mpq(1, 100), mpq(1, 10)])


def test_singular_limit_converges():
    family = build_quartic_onecut()
    report = singular_limit_check(family, 2, [mpq(1, 25), mpq(1, 10 ** 4)])
    assert report.monotone
    assert report.final_relative_difference < 0.05


def test_airy_f1_is_rigid():
    # x = z^2 + t1 only translates x; F^(1) does not move
    curve = curve_from_spec({"parameters": {"t1": "0"}, "x": {"numerator": ["t1", "0", "1"]},
                            "y": {"numerator": ["0", "1"]}}, dual="t1")
    assert free_energy_derivative(curve, 1) == 0
