"""Variations of a curve: moduli derivatives, homogeneity, symplectic maps and
singular limits.

All derivatives are exact first-order ones: a curve whose coefficients carry
Dual numbers is pushed through the same recursion, and the eps-part of the
result is compared with residue formulas on the undeformed curve.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import sympy
from gmpy2 import mpq

from .curve import CurveError, Polynomial, RationalFunction, SpectralCurve, analyze_poles
from .exactnum import Dual, Q, deriv_part, qstr, value_part
from .recursion import (
    CorrelatorTable,
    MultiDifferential,
    UnsupportedRegimeError,
    compute_F0,
    compute_F1_derivative,
)


class ModulusError(ValueError):
    """The requested modulus cannot be moved by a single coefficient perturbation."""


# ------------------------------------------------------------ pole moduli


def _pole_prec(curve: SpectralCurve, extra: int) -> int:
    degs = sum(max(p.degree, 0) for p in (curve.x.num, curve.x.den, curve.y.num, curve.y.den))
    return 2 * degs + 8 + extra


def moduli_residues(curve: SpectralCurve, W: MultiDifferential, slot: int, max_power: int | None = None) -> dict:
    """{(pole label, m): Res_alpha z_alpha^m W} contracted in one slot, as tensors of the other slots."""
    top = max(W.max_pole_order(), 1)
    poles = analyze_poles(curve, _pole_prec(curve, top + (max_power or 0)))
    out = {}
    for pole in poles:
        powers = range(1, (max_power or len(pole.times)) + 1)
        for m in powers:
            vec = {}
            for i, a in enumerate(curve.branch_locations):
                for e in range(1, top + 1):
                    vec[(i, e)] = pole.residue_pairing(m, a, e)
            out[(pole.label(), m)] = W.contract(slot, vec)
    return out


def moduli_shift(curve: SpectralCurve) -> dict:
    """eps-parts of every t_{alpha,k} and t_alpha of a dual curve, keyed by (label, k) (k = 0 for t_alpha)."""
    poles = analyze_poles(curve)
    out = {}
    for pole in poles:
        out[(pole.label(), 0)] = deriv_part(pole.temperature)
        for k, t in enumerate(pole.times, start=1):
            out[(pole.label(), k)] = deriv_part(t)
    return out


def perturb_coefficient(curve: SpectralCurve, which: str, power: int, amount=1) -> SpectralCurve:
    """Curve with one numerator coefficient of x or y shifted by amount * eps."""
    return perturb_coefficients(curve, {(which, power): Q(amount)})


def perturb_coefficients(curve: SpectralCurve, shifts: Mapping) -> SpectralCurve:
    def bump(rf: RationalFunction, name: str) -> RationalFunction:
        coeffs = list(rf.num.coeffs)
        top = max([p for (w, p) in shifts if w == name] + [len(coeffs) - 1])
        coeffs += [mpq(0)] * (top + 1 - len(coeffs))
        out = []
        for p, c in enumerate(coeffs):
            d = shifts.get((name, p), 0)
            out.append(Dual(value_part(c), deriv_part(c) + d) if d != 0 or isinstance(c, Dual) else c)
        return RationalFunction(Polynomial(tuple(out)), rf.den)

    return SpectralCurve(bump(curve.x, "x"), bump(curve.y, "y"), dict(curve.parameters), None,
                         curve.name + "+eps")


def coefficient_directions(curve: SpectralCurve) -> list[tuple[str, int]]:
    return [("y", p) for p in range(curve.y.num.degree + 1)] + [("x", p) for p in range(curve.x.num.degree + 1)]


def direction_for_modulus(curve: SpectralCurve, target: tuple, *, allow_combination: bool = False) -> dict:
    """Coefficient shifts {(x|y, power): c} moving t_target by eps and no other modulus."""
    dirs = coefficient_directions(curve)
    columns = []
    keys = set()
    for d in dirs:
        try:
            shift = moduli_shift(perturb_coefficient(curve, *d))
        except CurveError:
            shift = None
        columns.append(shift)
        if shift:
            keys.update(shift)
    keys.add(target)
    keys = sorted(keys, key=lambda k: (k[0], k[1]))
    for d, col in zip(dirs, columns):
        if col is None:
            continue
        nonzero = {k: v for k, v in col.items() if v != 0}
        if set(nonzero) == {target}:
            return {d: 1 / nonzero[target]}
    usable = [(d, col) for d, col in zip(dirs, columns) if col is not None]
    A = sympy.Matrix([[sympy.Rational(str(col.get(k, 0))) for _, col in usable] for k in keys])
    b = sympy.Matrix([1 if k == target else 0 for k in keys])
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError:
        raise ModulusError(f"modulus {target} is not reachable by coefficient perturbations of this curve")
    sol = sol.subs({p: 0 for p in params})
    combo = {d: Q(str(c)) for (d, _), c in zip(usable, sol) if c != 0}
    if not allow_combination and len(combo) > 1:
        text = " + ".join(f"{qstr(c)}*d[{w}_{p}]" for (w, p), c in combo.items())
        raise ModulusError(f"modulus {target} needs the combination {text}")
    return combo


@dataclass(frozen=True)
class ModuliDerivative:
    """Both sides of dF^(g)/dt_{alpha,k} = Res_alpha z_alpha^k W_1^(g)."""

    g: int
    modulus: tuple | None
    shifts: Mapping  # eps-parts of all moduli of the deformed curve
    dual_side: object
    residue_side: object

    @property
    def agrees(self) -> bool:
        return self.dual_side == self.residue_side


def free_energy_derivative(curve: SpectralCurve, g: int):
    """eps-part of F^(g) for a dual curve."""
    if g == 0:
        return deriv_part(compute_F0(curve))
    if g == 1:
        return compute_F1_derivative(curve)
    return deriv_part(CorrelatorTable(curve).F(g))


def moduli_derivative(curve: SpectralCurve, g: int, modulus: tuple | None = None, *,
                      allow_combination: bool = False) -> ModuliDerivative:
    """Dual-number derivative of F^(g) and its residue form.

    With modulus=None the curve must already carry eps-parts; otherwise the
    curve is rational and a coefficient perturbation moving exactly that
    modulus is constructed (a combination of coefficients only when allowed).
    """
    if modulus is not None:
        if curve.ring == "dual":
            raise ValueError("pass a rational curve together with a modulus")
        combo = direction_for_modulus(curve, modulus, allow_combination=allow_combination)
        base = curve
        deformed = perturb_coefficients(curve, combo)
    else:
        if curve.ring != "dual":
            raise ValueError("curve carries no eps-parts; name a modulus")
        base = curve.value_curve()
        deformed = curve
    shifts = moduli_shift(deformed)
    if any(v != 0 for (label, k), v in shifts.items() if k == 0):
        raise UnsupportedRegimeError("the deformation moves a temperature")
    dual_side = free_energy_derivative(deformed, g)
    if g == 0:
        poles = analyze_poles(base)
        residue = mpq(0)
        for pole in poles:
            for k in range(1, len(pole.times) + 1):
                dt = shifts.get((pole.label(), k), 0)
                if dt != 0:
                    zk = pole.zeta ** k
                    residue -= dt * (zk * pole.ydx)[-1]
    else:
        W1 = CorrelatorTable(base).W(1, g)
        need = max(k for (_, k), v in shifts.items() if v != 0) if any(shifts.values()) else 1
        table = moduli_residues(base, W1, 0, need)
        residue = mpq(0)
        for key, dt in shifts.items():
            if dt != 0 and key[1] > 0:
                residue += dt * table[key][()]
    return ModuliDerivative(g, modulus, shifts, dual_side, residue)


# ------------------------------------------------------------ derivatives at fixed x


def _deriv_poly(p: Polynomial) -> Polynomial:
    return Polynomial(tuple(deriv_part(c) for c in p.coeffs))


def _value_poly(p: Polynomial) -> Polynomial:
    return Polynomial(tuple(value_part(c) for c in p.coeffs))


def fixed_x_flow(curve: SpectralCurve) -> RationalFunction:
    """delta z at fixed x: -delta x(z) / x'(z) on the undeformed curve."""
    n, d = curve.x.num, curve.x.den
    n0, d0 = _value_poly(n), _value_poly(d)
    dx_eps = RationalFunction(_deriv_poly(n) * d0 - n0 * _deriv_poly(d), d0 * d0)
    x0 = RationalFunction(n0, d0)
    return -(dx_eps / x0.derivative())


def fixed_x_derivative(table: CorrelatorTable, k: int, g: int, points: Sequence):
    """eps-part of W_k^(g)(p_1..p_k) for a dual curve, with x(p_i) held fixed.

    Each point moves as z_i + eps * delta z(z_i) and the differential picks up
    the Jacobian 1 + eps * delta z'(z_i).
    """
    flow = fixed_x_flow(table.curve)
    dflow = flow.derivative()
    moved = [Dual(mpq(p), flow(p)) for p in points]
    W = table.W(k, g)
    val = W.evaluate(moved)
    for p in points:
        val = val * Dual(mpq(1), dflow(p))
    return deriv_part(val)


def loop_insertion_check(curve: SpectralCurve, k: int, g: int, *,
                         points: Sequence = (mpq(7, 3), mpq(-5, 2), mpq(11, 4), mpq(-13, 5), mpq(17, 6)),
                         directions: Sequence | None = None) -> tuple[bool, dict]:
    """dW_k^(g)/d eps at fixed x against sum_m delta t_m Res z^m W_{k+1}^(g) (new slot last).

    Every single-coefficient perturbation of the curve is one test direction;
    together they probe the contraction table Res_alpha z_alpha^m W_{k+1}.
    Returns (ok, witness) with witness {direction: (lhs, rhs)} on mismatch.
    """
    base = curve.value_curve() if curve.ring == "dual" else curve
    Wn = CorrelatorTable(base).W(k + 1, g)
    pts = tuple(points[:k])
    witness = {}
    report = {}
    for d in directions or coefficient_directions(base):
        try:
            deformed = perturb_coefficient(base, *d)
            shifts = moduli_shift(deformed)
        except CurveError:
            continue
        if any(v != 0 for (label, m), v in shifts.items() if m == 0):
            continue
        need = max([m for (_, m), v in shifts.items() if v != 0] or [1])
        table = moduli_residues(base, Wn, k, need)
        rhs = mpq(0)
        for key, dt in shifts.items():
            if dt != 0 and key[1] > 0:
                rhs += dt * (table[key].evaluate(pts) if k else table[key][()])
        if k == 0:
            lhs = free_energy_derivative(deformed, g)
        else:
            lhs = fixed_x_derivative(CorrelatorTable(deformed), k, g, pts)
        report[d] = (lhs, rhs)
        if lhs != rhs:
            witness[d] = (lhs, rhs)
    return not witness and bool(report), witness


def contraction_table(curve: SpectralCurve, k: int, g: int, max_power: int) -> dict:
    """{(pole, m): Res z^m W_{k+1}^(g)} for m = 0..max_power (new slot last)."""
    Wn = CorrelatorTable(curve).W(k + 1, g)
    top = max(Wn.max_pole_order(), 1)
    poles = analyze_poles(curve, _pole_prec(curve, top + max_power))
    out = {}
    for pole in poles:
        for m in range(max_power + 1):
            vec = {(i, e): pole.residue_pairing(m, a, e)
                   for i, a in enumerate(curve.branch_locations) for e in range(1, top + 1)}
            out[(pole.label(), m)] = Wn.contract(k, vec)
    return out


def homogeneity_check(curve: SpectralCurve, g: int) -> tuple[bool, tuple]:
    """(2 - 2g) F^(g) = sum t_{alpha,k} dF/dt_{alpha,k}, derivatives in residue form."""
    if g < 2:
        raise ValueError("homogeneity is checked for g >= 2")
    poles = analyze_poles(curve)
    if any(p.temperature != 0 for p in poles):
        raise UnsupportedRegimeError("homogeneity check needs all temperatures zero")
    table = CorrelatorTable(curve)
    W1 = table.W(1, g)
    maxk = max(len(p.times) for p in poles) if len(poles) else 1
    res = moduli_residues(curve, W1, 0, maxk)
    rhs = mpq(0)
    for pole in poles:
        for k, t in enumerate(pole.times, start=1):
            if t != 0:
                rhs += t * res[(pole.label(), k)][()]
    lhs = (2 - 2 * g) * table.F(g)
    return lhs == rhs, (lhs, rhs)


# ------------------------------------------------------------ symplectic maps


@dataclass(frozen=True)
class SymplecticTransform:
    kind: str  # add_rational_of_x | scale | negate_x | swap_xy
    payload: object = None

    KINDS = ("add_rational_of_x", "scale", "negate_x", "swap_xy")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "add_rational_of_x" and not isinstance(self.payload, RationalFunction):
            raise ValueError("add_rational_of_x needs a RationalFunction payload")
        if self.kind == "scale":
            if self.payload is None or Q(self.payload) == 0:
                raise ValueError("scale needs a nonzero rational payload")


def apply_transform(curve: SpectralCurve, T: SymplecticTransform) -> SpectralCurve:
    x, y = curve.x, curve.y
    if T.kind == "add_rational_of_x":
        new = SpectralCurve(x, y + T.payload.compose(x), dict(curve.parameters), None, curve.name + "+R(x)")
    elif T.kind == "scale":
        c = Q(T.payload)
        new = SpectralCurve(x * (1 / c), y * c, dict(curve.parameters), None, curve.name + "*scale")
    elif T.kind == "negate_x":
        new = SpectralCurve(-x, y, dict(curve.parameters), None, curve.name + "(-x)")
    else:
        new = SpectralCurve(y, x, dict(curve.parameters), None, curve.name + "(swap)")
    return new.validate()


# ------------------------------------------------------------ singular limits


@dataclass(frozen=True)
class SingularFamily:
    """A one-parameter family E(t) degenerating at t = 0 to a (p, q) singularity.

    build maps a sample value of t to a curve; singular is the blown-up limit curve.
    """

    build: Callable[[object], SpectralCurve]
    singular: SpectralCurve
    p: int
    q: int
    name: str = ""

    @property
    def nu(self) -> mpq:
        return mpq(1, self.p + self.q - 1)

    def gamma(self, g: int) -> mpq:
        return (2 - 2 * g) * (self.p + self.q) * self.nu


@dataclass
class SingularLimitReport:
    g: int
    gamma: mpq
    limit: mpq
    samples: list = field(default_factory=list)  # (t, rescaled F, relative difference)

    @property
    def monotone(self) -> bool:
        diffs = [abs(r) for _, _, r in self.samples]
        return all(b < a for a, b in zip(diffs, diffs[1:]))

    @property
    def final_relative_difference(self) -> float:
        return float(abs(self.samples[-1][2]))


def _rescale(F, t, gamma: mpq):
    """t^(-gamma) * F, exact when t^(-gamma) is rational, else a float."""
    num, den = int(gamma.numerator), int(gamma.denominator)
    root = sympy.Rational(str(t)) ** sympy.Rational(-num, den)
    if root.is_Rational:
        return F * Q(str(root))
    return float(F) * float(root)


def singular_limit_check(family: SingularFamily, g: int, samples: Sequence) -> SingularLimitReport:
    """t^(-gamma_g) F^(g)(E(t)) against F^(g)(E_sing) along decreasing samples of t."""
    ts = [Q(t) for t in samples]
    if any(b >= a for a, b in zip(ts, ts[1:])) or ts[-1] <= 0:
        raise ValueError("samples must be positive and strictly decreasing")
    gamma = family.gamma(g)
    limit = CorrelatorTable(family.singular).F(g)
    report = SingularLimitReport(g, gamma, limit)
    for t in ts:
        curve = family.build(t).validate()
        F = CorrelatorTable(curve).F(g)
        scaled = _rescale(F, t, gamma)
        rel = (scaled - limit) / limit
        report.samples.append((t, scaled, rel))
    return report
