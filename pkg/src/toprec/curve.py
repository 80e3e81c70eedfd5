"""Genus-0 spectral curves given by a rational parametrization z -> (x(z), y(z)).

Branch points are the zeros of dx. Near each one the local involution
q -> qbar with x(qbar) = x(q) is computed as a power series, together with the
local expansions of x, y, omega = (y(q) - y(qbar)) dx(q) and Phi = int y dx.
Poles of y dx (including z = infinity) carry the moduli of the curve.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exactnum import (
    INF,
    Dual,
    LaurentSeries,
    Polynomial,
    Q,
    TruncationError,
    dual_root,
    qstr,
    ring_tag,
    series_compose,
    series_solve,
    value_part,
)

DEFAULT_PREC = 16


class CurveError(ValueError):
    """The curve data does not satisfy the conditions the recursion needs."""


class IrrationalBranchPointError(CurveError):
    pass


@dataclass(frozen=True)
class RationalFunction:
    num: Polynomial
    den: Polynomial = field(default_factory=lambda: Polynomial((mpq(1),)))

    def __post_init__(self):
        if self.den.is_zero():
            raise CurveError("rational function with zero denominator")

    @staticmethod
    def of(num: Sequence, den: Sequence = (1,)) -> "RationalFunction":
        return RationalFunction(Polynomial.of(num), Polynomial.of(den))

    @staticmethod
    def poly(p: Polynomial) -> "RationalFunction":
        return RationalFunction(p, Polynomial((mpq(1),), p.var))

    def __call__(self, z):
        d = self.den(z)
        if d == 0:
            raise ZeroDivisionError(f"pole at z = {z}")
        return self.num(z) / d

    def derivative(self) -> "RationalFunction":
        return RationalFunction(self.num.derivative() * self.den - self.num * self.den.derivative(),
                                self.den * self.den)

    def _lift(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.poly(other)
        return RationalFunction(Polynomial((other,)), Polynomial((mpq(1),)))

    def __add__(self, other):
        o = self._lift(other)
        if o.den == self.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __mul__(self, other):
        o = self._lift(other)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def compose(self, inner: "RationalFunction") -> "RationalFunction":
        """self(inner(z)) as a rational function."""
        dn, dd = self.num.degree, self.den.degree
        n = max(dn, dd, 0)
        num = Polynomial(())
        den = Polynomial(())
        for k in range(n + 1):
            term = inner.num ** k * inner.den ** (n - k)
            num = num + term * self.num[k]
            den = den + term * self.den[k]
        return RationalFunction(num, den)

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def series(self, a, prec) -> LaurentSeries:
        """Expansion of self(a + t) to O(t^prec)."""
        n = LaurentSeries.from_polynomial(self.num.shift(a), center=mpq(0))
        d = LaurentSeries.from_polynomial(self.den.shift(a), center=mpq(0))
        if n.is_zero():
            return LaurentSeries((), 0, prec)
        return n.div(d, prec)

    def series_at_infinity(self, prec) -> LaurentSeries:
        """Expansion of self(1/u) in u to O(u^prec)."""
        dn, dd = self.num.degree, self.den.degree
        if self.num.is_zero():
            return LaurentSeries((), 0, prec)
        n = LaurentSeries.exact(tuple(reversed(self.num.coeffs)), -dn)
        d = LaurentSeries.exact(tuple(reversed(self.den.coeffs)), -dd)
        return n.div(d, prec)

    def map(self, f) -> "RationalFunction":
        return RationalFunction(self.num.map(f), self.den.map(f))

    def coefficients(self):
        return self.num.coeffs + self.den.coeffs

    def __repr__(self):
        if self.den == Polynomial((mpq(1),)):
            return f"{self.num!r}"
        return f"({self.num!r})/({self.den!r})"


# ---------------------------------------------------------------- root finding


def _sympy_poly(p: Polynomial):
    import sympy

    z = sympy.Symbol("z")
    coeffs = [sympy.Rational(int(value_part(c).numerator), int(value_part(c).denominator)) for c in p.coeffs]
    return sympy.Poly(list(reversed(coeffs)), z, domain="QQ"), z


def rational_roots(p: Polynomial, *, strict: bool = True, what: str = "polynomial") -> list[tuple[mpq, int]]:
    """Rational roots with multiplicity of the value part of p.

    With strict=True an irreducible factor of degree >= 2 raises
    IrrationalBranchPointError naming the factor.
    """
    if p.degree <= 0:
        return []
    poly, z = _sympy_poly(p)
    _, factors = poly.factor_list()
    roots = []
    for fac, mult in factors:
        if fac.degree() == 1:
            c1, c0 = fac.all_coeffs()
            r = -c0 / c1
            roots.append((mpq(int(r.p), int(r.q)), mult))
        elif strict:
            raise IrrationalBranchPointError(
                f"{what} has the irreducible factor {fac.as_expr()} of degree {fac.degree()}; "
                "its roots are not rational (supply explicit rational branch points or change the curve)"
            )
    roots.sort(key=lambda rm: rm[0])
    return roots


# ---------------------------------------------------------------- branch points


@dataclass(frozen=True)
class BranchPoint:
    """Local data at a simple zero a of dx, in the variable t = q - a."""

    index: int
    a: object
    prec: int
    x_series: LaurentSeries
    dx_series: LaurentSeries
    y_series: LaurentSeries
    involution: LaurentSeries  # s(t) with qbar = a + s(t)
    omega: LaurentSeries  # (y(q) - y(qbar)) x'(q), density in dt

    @cached_property
    def involution_derivative(self) -> LaurentSeries:
        return self.involution.derivative()

    @cached_property
    def phi(self) -> LaurentSeries:
        return (self.y_series * self.dx_series).integral()

    @property
    def x2(self):
        """Coefficient of t^2 in x(a + t)."""
        return self.x_series[2]


def _involution_equation(x: RationalFunction, a) -> dict:
    """Coefficients of Xn(a+s)Xd(a+t) - Xn(a+t)Xd(a+s) as {(i, j): c}."""
    n = x.num.shift(a)
    d = x.den.shift(a)
    F: dict = {}
    for i, ni in enumerate(n.coeffs):
        for j, dj in enumerate(d.coeffs):
            c = ni * dj
            if c == 0:
                continue
            F[(i, j)] = F.get((i, j), 0) + c
            F[(j, i)] = F.get((j, i), 0) - c
    return {k: v for k, v in F.items() if v != 0}


def _build_branch_point(curve: "SpectralCurve", index: int, a, prec: int) -> BranchPoint:
    x, y = curve.x, curve.y
    if value_part(x.den(a)) == 0:
        raise CurveError(f"branch point {a} is a pole of x")
    if value_part(y.den(a)) == 0:
        raise CurveError(f"y has a pole at the branch point {a}")
    xs = x.series(a, prec + 2)
    dxs = xs.derivative()
    ys = y.series(a, prec + 2)
    if xs[1] != 0:
        raise CurveError(f"{a} is not a zero of dx")
    if value_part(xs[2]) == 0:
        raise CurveError(f"branch point {a} is not simple: x'' vanishes")
    s = series_solve(_involution_equation(x, a), mpq(0), mpq(-1), prec + 2)
    ybar = series_compose(ys, s)
    omega = (ys - ybar) * dxs
    if omega.is_zero() or omega.val != 2 or value_part(omega.leading()) == 0:
        raise CurveError(
            f"y(q) - y(qbar) must vanish to order exactly 1 at the branch point {a}; "
            "omega does not have valuation 2"
        )
    return BranchPoint(index, a, prec, xs, dxs, ys, s, omega)


@dataclass(frozen=True, eq=False)
class SpectralCurve:
    """Rational parametrization x(z), y(z) of a genus-0 spectral curve."""

    x: RationalFunction
    y: RationalFunction
    parameters: Mapping = field(default_factory=dict)
    branch_hint: tuple | None = None
    name: str = ""

    @staticmethod
    def from_polynomials(x: Sequence, y: Sequence, *, x_den: Sequence = (1,), y_den: Sequence = (1,),
                         name: str = "", parameters: Mapping | None = None) -> "SpectralCurve":
        def conv(cs):
            return [c if isinstance(c, Dual) else Q(c) for c in cs]

        return SpectralCurve(
            RationalFunction(Polynomial(tuple(conv(x))), Polynomial(tuple(conv(x_den)))),
            RationalFunction(Polynomial(tuple(conv(y))), Polynomial(tuple(conv(y_den)))),
            dict(parameters or {}),
            None,
            name,
        )

    def __post_init__(self):
        if self.x.num.degree <= 0 and self.x.den.degree <= 0:
            raise CurveError("x must be nonconstant")
        object.__setattr__(self, "_local_cache", {})

    @cached_property
    def ring(self) -> str:
        return ring_tag(self.x.coefficients() + self.y.coefficients()
                        + tuple(self.branch_hint or ()))

    @cached_property
    def dx_numerator(self) -> Polynomial:
        return self.x.num.derivative() * self.x.den - self.x.num * self.x.den.derivative()

    @cached_property
    def branch_locations(self) -> tuple:
        num = self.dx_numerator
        if num.is_zero():
            raise CurveError("dx vanishes identically")
        if self.branch_hint is not None:
            locs = []
            for a in self.branch_hint:
                if num(a) != 0:
                    raise CurveError(f"supplied branch point {a} is not a zero of dx")
                locs.append(a)
            expected = num.degree - _pole_multiplicity_deficit(self.x)
            if len(locs) != expected:
                raise CurveError(
                    f"{len(locs)} branch points supplied but dx has {expected} zeros away from poles of x"
                )
            return tuple(locs)
        roots = rational_roots(num, what="numerator of dx")
        locs = []
        for r, mult in roots:
            if self.x.den(r) == 0 if self.ring == "rational" else value_part(self.x.den(r)) == 0:
                continue
            if mult > 1:
                raise CurveError(f"branch point {qstr(r)} is not simple (zero of dx of order {mult})")
            locs.append(_lift_root(num, r))
        return tuple(locs)

    @property
    def branch_points(self) -> tuple[BranchPoint, ...]:
        return tuple(self.local(i, DEFAULT_PREC) for i in range(len(self.branch_locations)))

    def local(self, i: int, prec: int) -> BranchPoint:
        key = (i, prec)
        cache = self._local_cache
        if key not in cache:
            # reuse a higher-precision computation when one exists
            cache[key] = _build_branch_point(self, i, self.branch_locations[i], prec)
        return cache[key]

    def validate(self) -> "SpectralCurve":
        self.branch_points
        return self

    @cached_property
    def global_involution(self):
        """For polynomial x of degree 2 returns c with x(c - z) = x(z)."""
        if not self.x.is_polynomial() or self.x.num.degree != 2:
            raise CurveError("sheet enumeration is available only for polynomial x of degree 2")
        c2 = self.x.num[2] / self.x.den[0]
        c1 = self.x.num[1] / self.x.den[0]
        return -c1 / c2

    def with_y(self, y: RationalFunction) -> "SpectralCurve":
        return SpectralCurve(self.x, y, self.parameters, self.branch_hint, self.name)

    def value_curve(self) -> "SpectralCurve":
        """Same curve with the eps-parts dropped."""
        f = value_part
        return SpectralCurve(self.x.map(f), self.y.map(f), self.parameters,
                             None if self.branch_hint is None else tuple(map(f, self.branch_hint)), self.name)

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return f"SpectralCurve({label}x={self.x!r}, y={self.y!r})"


def _pole_multiplicity_deficit(x: RationalFunction) -> int:
    # zeros of Xn' Xd - Xn Xd' sitting at poles of x (order m pole gives m-1 zeros)
    total = 0
    for r, mult in rational_roots(x.den, strict=False):
        total += mult - 1
    return total


def _lift_root(num: Polynomial, r):
    """Exact root of num near the value-part root r (one Newton step suffices over duals)."""
    if not any(isinstance(c, Dual) for c in num.coeffs):
        return r
    d = num.derivative()(r)
    if value_part(d) == 0:
        raise CurveError(f"branch point {qstr(r)} is not simple")
    a = Dual.lift(r) - num(r) / d
    if num(a) != 0:
        raise CurveError("failed to lift the branch point to first order")
    return a


def find_branch_points(curve: SpectralCurve, prec: int = DEFAULT_PREC) -> tuple[BranchPoint, ...]:
    return tuple(curve.local(i, prec) for i in range(len(curve.branch_locations)))


def local_phi(bp: BranchPoint) -> LaurentSeries:
    """Antiderivative of y dx in t = q - a with zero constant term."""
    return bp.phi


# ---------------------------------------------------------------- poles of y dx


@dataclass(frozen=True)
class Pole:
    """A pole alpha of y dx with its local parameter z_alpha.

    location is a rational or None for z = infinity. The local coordinate u is
    z - alpha at finite poles and 1/z at infinity.
    """

    location: object
    kind: str  # "x-pole" (z_alpha = x^(1/d)) or "regular" (z_alpha = 1/(x - x(alpha)))
    degree: int  # pole order of x for "x-pole", 0 otherwise
    order: int  # pole order of y dx in u
    temperature: object
    times: tuple  # t_{alpha,k} for k = 1..len(times)
    zeta: LaurentSeries  # z_alpha(u)
    ydx: LaurentSeries  # density of y dx in du
    prec: int

    @property
    def at_infinity(self) -> bool:
        return self.location is None

    def potential(self) -> Polynomial:
        return Polynomial((mpq(0),) + tuple(self.times), "z_alpha")

    def label(self) -> str:
        return "inf" if self.location is None else qstr(value_part(self.location))

    def form_series(self, a, e: int, prec: int) -> LaurentSeries:
        """dz/(z - a)^e written as a density in du, to O(u^prec)."""
        if self.location is None:
            # z = 1/u, dz = -du/u^2, (1/u - a)^-e = u^e (1 - a u)^-e
            base = LaurentSeries.exact((mpq(1), -a))
            core = base.inverse(prec=max(prec - e + 2, 1)) ** e if e > 0 else base ** (-e)
            return (-core).shift(e - 2).truncate(prec)
        base = LaurentSeries.exact((self.location - a, mpq(1)))
        if value_part(self.location - a) == 0:
            raise CurveError("pole of y dx coincides with a branch point")
        if e >= 0:
            return (base.inverse(prec=prec) ** e).truncate(prec) if e > 0 else LaurentSeries.monomial(0, 1)
        return base ** (-e)

    def residue_pairing(self, k: int, a, e: int):
        """Res_alpha z_alpha^k dz/(z - a)^e."""
        zk = self.zeta ** k if k >= 0 else self.zeta.inverse() ** (-k)
        need = -1 - zk.val + 1
        form = self.form_series(a, e, max(need, 1))
        return (zk * form)[-1]


@dataclass(frozen=True)
class PoleData:
    poles: tuple[Pole, ...]

    def __iter__(self):
        return iter(self.poles)

    def __len__(self):
        return len(self.poles)

    def sum_temperatures(self):
        return sum((p.temperature for p in self.poles), mpq(0))

    def moduli(self) -> dict:
        """{(pole label, k): t_{alpha,k}} with nonzero entries."""
        out = {}
        for p in self.poles:
            for k, t in enumerate(p.times, start=1):
                if t != 0:
                    out[(p.label(), k)] = t
        return out


def _local_expansions(curve: SpectralCurve, location, prec: int):
    if location is None:
        return curve.x.series_at_infinity(prec), curve.y.series_at_infinity(prec)
    return curve.x.series(location, prec), curve.y.series(location, prec)


def _binomial_power(r: LaurentSeries, exponent: mpq, prec: int) -> LaurentSeries:
    """(1 + r)^exponent for r of valuation >= 1, to O(u^prec)."""
    out = LaurentSeries.monomial(0, mpq(1))
    term = LaurentSeries.monomial(0, mpq(1))
    coef = mpq(1)
    n = 0
    while True:
        n += 1
        if r.is_zero() or n * r.val >= prec:
            break
        coef = coef * (exponent - n + 1) / n
        term = (term * r).truncate(prec)
        out = out + term.scale(coef)
    return out.truncate(prec)


def _analyze_pole(curve: SpectralCurve, location, prec: int) -> Pole | None:
    xs, ys = _local_expansions(curve, location, prec)
    ydx = ys * xs.derivative()
    if ydx.is_zero() or ydx.val >= 0:
        return None
    m = -ydx.val
    if xs.val < 0:
        d = -xs.val
        c = xs.leading()
        root = dual_root(c, d)
        if root is None:
            raise CurveError(f"local parameter x^(1/{d}) at the pole {location} is not rational")
        rest = (xs.shift(d).scale(1 / c) - 1)
        zeta = _binomial_power(rest, mpq(1, d), prec + d).scale(root).shift(-1)
        kind, degree = "x-pole", d
    else:
        x0 = xs[0]
        dx0 = xs - x0
        if dx0.is_zero() or dx0.val != 1:
            raise CurveError(f"pole of y dx at a zero of dx ({location}) is not supported")
        zeta = dx0.inverse()
        kind, degree = "regular", 0
    temperature = ydx[-1]
    times = []
    for k in range(1, m):
        zk = zeta.inverse() ** k
        times.append(-(zk * ydx)[-1] / k)
    return Pole(location, kind, degree, m, temperature, tuple(times), zeta, ydx, prec)


def analyze_poles(curve: SpectralCurve, prec: int | None = None) -> PoleData:
    """Temperatures and potentials at every pole of y dx (rational or infinite)."""
    degs = sum(max(p.degree, 0) for p in (curve.x.num, curve.x.den, curve.y.num, curve.y.den))
    prec = prec or 2 * degs + 8
    candidates = []
    for poly in (curve.x.den, curve.y.den):
        for r, _ in rational_roots(poly, what="denominator of y dx"):
            if all(r != c for c in candidates):
                candidates.append(r)
    poles = []
    for loc in candidates:
        loc_exact = loc
        pole = _analyze_pole(curve, loc_exact, prec)
        if pole is not None:
            poles.append(pole)
    pole = _analyze_pole(curve, None, prec)
    if pole is not None:
        poles.append(pole)
    return PoleData(tuple(poles))
