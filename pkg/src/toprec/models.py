"""Example curves (Airy, (p,q) minimal models, Kontsevich, a critical quartic
family) and closed-form reference data for them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import sympy
from gmpy2 import mpq

from .curve import CurveError, RationalFunction, SpectralCurve, _binomial_power
from .exactnum import LaurentSeries, Polynomial, Q
from .recursion import MultiDifferential


class PQError(ValueError):
    pass


# ------------------------------------------------------------ Airy


def build_airy() -> SpectralCurve:
    return SpectralCurve.from_polynomials([0, 0, 1], [0, 1], name="airy")


def airy_f_series(order: int) -> list[mpq]:
    """f_0..f_order with f(p) = sum f_k p^(1-3k) solving f^2 + f'/(2p) = p^2."""
    if order < 0:
        raise ValueError("order must be >= 0")
    f = [mpq(1)]
    for k in range(1, order + 1):
        s = mpq(4 - 3 * k, 2) * f[k - 1] + sum((f[j] * f[k - j] for j in range(1, k)), mpq(0))
        f.append(-s / 2)
    return f


def airy_one_point_coefficients(max_genus: int) -> dict[int, mpq]:
    """{g: c_g} with c_g dp / p^(6g-2) the genus-g part of
    -2 (p^2 - f(p) f(-p)) / (f(p) - f(-p)) p dp, expanded in u = 1/p."""
    n = 2 * max_genus + 2
    f = airy_f_series(n)
    prec = 6 * max_genus + 4
    plus = [mpq(0)] * (3 * n + 1)
    minus = [mpq(0)] * (3 * n + 1)
    for k, c in enumerate(f):
        plus[3 * k] = c
        minus[3 * k] = c * (-1) ** (k + 1)
    fp = LaurentSeries(plus, -1, prec)
    fm = LaurentSeries(minus, -1, prec)
    num = (LaurentSeries.monomial(-2, mpq(1)) - fp * fm).scale(mpq(-2))
    ratio = num.div(fp - fm, prec)
    return {g: ratio[6 * g - 1] for g in range(1, max_genus + 1)}


# ------------------------------------------------------------ (p,q) minimal models


def fractional_power(Qpoly: Polynomial, a: int, q: int, prec: int) -> LaurentSeries:
    """Q^(a/q) for monic Q of degree q, as a series in u = 1/zeta to O(u^prec)."""
    if Qpoly.degree != q or Qpoly.coeffs[-1] != 1:
        raise PQError("Q must be monic of degree q")
    # Q(1/u) u^q = 1 + r(u)
    r = LaurentSeries.exact(tuple(reversed(Qpoly.coeffs))) - 1
    return _binomial_power(r, mpq(a, q), prec + a).shift(-a).truncate(prec)


def positive_part(s: LaurentSeries) -> Polynomial:
    """Nonnegative powers of zeta of a series in u = 1/zeta."""
    if s.is_zero():
        return Polynomial(())
    top = max(-s.val, -1)
    return Polynomial(tuple(s[-j] if -j >= s.val else mpq(0) for j in range(top + 1)), "zeta")


@dataclass(frozen=True)
class PQModel:
    p: int
    q: int
    times: Mapping[int, object] = field(default_factory=dict)  # t_1 .. t_{p+q-2}

    def __post_init__(self):
        from math import gcd

        if self.p < 1 or self.q < 1 or gcd(self.p, self.q) != 1:
            raise PQError("p, q must be coprime positive integers")
        for k in self.times:
            if not 1 <= k <= self.p + self.q - 2:
                raise PQError(f"time t_{k} outside 1..{self.p + self.q - 2}")

    def t(self, k: int) -> mpq:
        return Q(self.times.get(k, 0))


def pq_times(Qpoly: Polynomial, Ppoly: Polynomial, p: int, q: int) -> dict[int, mpq]:
    """Times t_1..t_{p+q-2} of a pair (Q, P) satisfying the minimal-model normalization.

    Raises PQError when (Q^{p/q})_- has terms the time expansion cannot produce.
    """
    prec = q + 1
    Qp = fractional_power(Qpoly, p, q, prec)
    times: dict[int, mpq] = {}
    # (Q^{p/q})_- = sum_{j=1}^{q-2} (q-j)/q t_{q-j} Q^{-j/q} + t_1/q u^{q-1} + O(u^q)
    inv = {j: fractional_power(Qpoly, -j, q, prec) for j in range(1, q - 1)}
    for j in range(1, q - 1):
        acc = Qp[j] - sum(((q - jj) * times[q - jj] / q * inv[jj][j] for jj in range(1, j)), mpq(0))
        times[q - j] = acc * q / (q - j)
    if q >= 2:
        acc = Qp[q - 1] - sum(((q - jj) * times[q - jj] / q * inv[jj][q - 1] for jj in range(1, q - 1)), mpq(0))
        times[1] = acc * q
    # P = Q^{p/q}_+ - sum_{j=0}^{p-2} (q+j)/q t_{q+j} Q^{j/q}_+
    diff = positive_part(Qp) - Ppoly
    if diff.degree > p - 2:
        raise PQError("P - (Q^{p/q})_+ has degree above p - 2")
    pos = {j: positive_part(fractional_power(Qpoly, j, q, prec)) for j in range(p - 1)}
    rest = diff
    for j in range(p - 2, -1, -1):
        c = rest[j] if j <= rest.degree else mpq(0)
        tj = c * q / (q + j)
        times[q + j] = tj
        rest = rest - pos[j] * (tj * (q + j) / q)
    if not rest.is_zero():
        raise PQError("P is not in the span of the (Q^{j/q})_+")
    return {k: v for k, v in sorted(times.items())}


def build_pq_from_polynomials(Qcoeffs: Sequence, Pcoeffs: Sequence, p: int, q: int, *,
                              check: bool = True) -> SpectralCurve:
    Qpoly = Polynomial.of(Qcoeffs, "zeta")
    Ppoly = Polynomial.of(Pcoeffs, "zeta")
    if Qpoly.degree != q or Ppoly.degree != p:
        raise PQError(f"degrees ({Ppoly.degree}, {Qpoly.degree}) differ from (p, q) = ({p}, {q})")
    if check:
        pq_times(Qpoly, Ppoly, p, q)
    return SpectralCurve.from_polynomials(Qpoly.coeffs, Ppoly.coeffs, name=f"pq-{p}-{q}")


def solve_Q(model: PQModel) -> list[Polynomial]:
    """All monic Q = zeta^q + sum_{j<=q-2} u_{q-j} zeta^j with rational u solving the
    conditions from t_1..t_{q-1}, sorted lexicographically by (u_2, ..., u_q)."""
    p, q = model.p, model.q
    if q == 1:
        return [Polynomial.of([0, 1], "zeta")]
    us = sympy.symbols(f"u2:{q + 1}")
    zeta_inv = sympy.symbols("w")
    # 1 + r(w) with w = 1/zeta
    r = sum(us[q - j - 2] * zeta_inv ** (q - j) for j in range(q - 1))
    prec = q + 1

    def power(a):
        ex = sympy.Rational(a, q)
        out, term, coef = sympy.Integer(1), sympy.Integer(1), sympy.Integer(1)
        for n in range(1, prec + abs(a) + 1):
            coef = coef * (ex - n + 1) / n
            term = sympy.expand(term * r)
            term = sum(term.coeff(zeta_inv, d) * zeta_inv ** d for d in range(prec + abs(a) + 1))
            out += coef * term
        return sympy.expand(out)

    Qp = sympy.expand(power(p))  # times zeta^p
    eqs = []
    ts = {k: sympy.Rational(str(model.t(k))) for k in range(1, q)}
    rhs = ts[1] / q * zeta_inv ** (q - 1 + p)
    for j in range(1, q - 1):
        rhs += sympy.Rational(q - j, q) * ts[q - j] * sympy.expand(power(-j)) * zeta_inv ** (j + p)
    rhs = sympy.expand(rhs)
    for d in range(p + 1, p + q):
        eqs.append(sympy.expand(Qp.coeff(zeta_inv, d) - rhs.coeff(zeta_inv, d)))
    sols = sympy.solve(eqs, us, dict=True)
    rational = [s for s in sols if all(s.get(u, u).is_Rational for u in us)]
    if not rational:
        raise PQError(f"no rational solution for u_2..u_{q}; residual system: {eqs}")
    out = []
    for sol in sorted(rational, key=lambda s: [s[u] for u in us]):
        coeffs = [mpq(0)] * (q + 1)
        coeffs[q] = mpq(1)
        for j in range(q - 1):
            coeffs[j] = Q(str(sol[us[q - j - 2]]))
        out.append(Polynomial(tuple(coeffs), "zeta"))
    return out


def build_pq(model: PQModel, branch: int = 0) -> SpectralCurve:
    """The (p,q) curve for the given times.

    The times fix Q only up to a finite choice (for (3,2), the sign of v);
    branch indexes the rational solutions in solve_Q order, and the default
    0 is the one with v > 0 for pure gravity.
    """
    p, q = model.p, model.q
    solutions = solve_Q(model)
    if not 0 <= branch < len(solutions):
        raise PQError(f"branch {branch} out of range; {len(solutions)} rational solutions")
    Qpoly = solutions[branch]
    prec = q + 1
    P = positive_part(fractional_power(Qpoly, p, q, prec))
    for j in range(p - 1):
        t = model.t(q + j)
        if t != 0:
            P = P - positive_part(fractional_power(Qpoly, j, q, prec)) * (t * (q + j) / q)
    curve = SpectralCurve.from_polynomials(Qpoly.coeffs, P.coeffs, name=f"pq-{p}-{q}")
    return curve


def _polypart(s: LaurentSeries) -> Polynomial:
    return positive_part(s)


def _series_derivative_zeta(s: LaurentSeries) -> LaurentSeries:
    # d/dzeta of sum c_n u^n with u = 1/zeta is sum -n c_n u^(n+1)
    return LaurentSeries([-(s.val + i) * c for i, c in enumerate(s.coeffs)], s.val + 1,
                         s.prec + 1 if s.prec != float("inf") else s.prec)


def pq_poisson_check(curve: SpectralCurve, p: int, q: int) -> tuple[bool, object]:
    """Poisson relation p P Q' - q Q P' = const, with the time-dependent terms removed.

    The bracket of a deformed pair equals
        -sum_{1<k<q} (p+q-k) t_k (Q^{k/q}_+)'  +  sum_{k>=q} (k/q) t_k [C_k]
    plus the constant -(p+q-1) t_1, where [C_k] is the polynomial part of
    (p-k') q/(k'+q) (Q^{(k'+q)/q})' - p N Q' + q Q N', k' = k - q, N = (Q^{k'/q})_-.
    Returns (ok, remainder); ok means the remainder is the constant -(p+q-1) t_1.
    """
    Qp, Pp = curve.x.num, curve.y.num
    times = pq_times(Qp, Pp, p, q)
    bracket = Pp * Qp.derivative() * p - Qp * Pp.derivative() * q
    prec = 2 * (p + q) + 2
    Qser = LaurentSeries.exact(tuple(reversed(Qp.coeffs))).shift(-q)
    dQser = _series_derivative_zeta(Qser)
    rem = bracket
    for k in range(2, q):
        rem = rem + positive_part(fractional_power(Qp, k, q, prec)).derivative() * ((p + q - k) * times[k])
    for k in range(q, p + q - 1):
        t = times.get(k, mpq(0))
        if t == 0:
            continue
        m = k - q
        full = fractional_power(Qp, m, q, prec)
        neg = full - LaurentSeries.exact(tuple(positive_part(full).coeffs[::-1] or [0]),
                                         -max(positive_part(full).degree, 0))
        top = _series_derivative_zeta(fractional_power(Qp, m + q, q, prec)).scale(mpq((p - m) * q, m + q))
        term = top - (neg * dQser).scale(p) + (Qser * _series_derivative_zeta(neg)).scale(q)
        rem = rem + _polypart(term.truncate(1)) * (mpq(k, q) * t)
    expected = -(p + q - 1) * times.get(1, mpq(0))
    if rem.degree <= 0 and (rem[0] if rem.degree == 0 else mpq(0)) == expected:
        return True, expected
    return False, rem


def ising_polynomials(v, w, t5=0) -> tuple[list, list]:
    v, w, t5 = Q(v), Q(w), Q(t5)
    Qc = [-3 * w, -3 * v, 0, 1]
    Pc = [2 * v * v + mpq(10, 3) * t5 * v, -4 * w, -4 * v - mpq(5, 3) * t5, 0, 1]
    return Qc, Pc


# ------------------------------------------------------------ Kontsevich


@dataclass(frozen=True)
class KontsevichTimes:
    times: Mapping[int, object] = field(default_factory=dict)

    def t(self, k: int) -> mpq:
        return Q(self.times.get(k, 0))

    def __post_init__(self):
        if any(k < 1 for k in self.times):
            raise ValueError("Kontsevich times are indexed from 1")
        if self.t(3) == 2:
            raise CurveError("2 - t_3 = 0: the curve degenerates")

    @property
    def top(self) -> int:
        return max([k for k, v in self.times.items() if Q(v) != 0] + [3])

    def odd_part(self) -> "KontsevichTimes":
        return KontsevichTimes({k: v for k, v in self.times.items() if k % 2 == 1 or k == 1})


def build_kontsevich(times: KontsevichTimes) -> SpectralCurve:
    """x = z^2 + t_1, y = -(z - 1/2 sum_k t_{k+2} z^k).

    The overall sign of y fixes the orientation in which the correlators take
    their tabulated form; free energies do not depend on it.
    """
    deg = max(times.top - 2, 1)
    y = [mpq(0)] * (deg + 1)
    y[1] = mpq(-1)
    for k in range(deg + 1):
        y[k] += times.t(k + 2) / 2
    x = [times.t(1), mpq(0), mpq(1)]
    return SpectralCurve.from_polynomials(x, y, name="kontsevich")


def kontsevich_as_pq(times: KontsevichTimes) -> tuple[PQModel, mpq]:
    """(model, c) with the Kontsevich curve equal to x = Q, y = c P of the (p,2) model.

    Requires t_k = 0 for k > p + 2 with p odd, and t_{p+1} = 0 so P has no
    subleading term; c = t_{p+2} / 2 is the leading coefficient of y.
    """
    curve = build_kontsevich(times)
    ycoeffs = curve.y.num.coeffs
    p = len(ycoeffs) - 1
    if p % 2 == 0:
        raise PQError(f"top degree {p} of y is even; no (p,2) model")
    c = ycoeffs[-1]
    P = Polynomial(tuple(a / c for a in ycoeffs), "zeta")
    Qpoly = Polynomial(tuple(curve.x.num.coeffs), "zeta")
    return PQModel(p, 2, pq_times(Qpoly, P, p, 2)), c


def pq_curve_matches(curve: SpectralCurve, model: PQModel, scale) -> bool:
    """x and y of curve equal Q and scale * P of build_pq(model) on some branch."""
    for branch in range(len(solve_Q(model))):
        ref = build_pq(model, branch)
        if curve.x == ref.x and curve.y == ref.y * RationalFunction.of([Q(scale)]):
            return True
    return False


# ------------------------------------------------------------ critical quartic family


def quartic_onecut_curve(s) -> SpectralCurve:
    """One-cut quartic curve x = z + 1/z, y = (z - 1/z)((x-2)/2 + (x-2)^2/4 + delta), delta = -3s/2.

    At s = 0 the endpoint z = 1 has y ~ (z-1)^3 (a (3,2) point); z = -1 stays regular.
    """
    s = Q(s)
    d = -3 * s / 2
    zx2 = Polynomial.of([1, -2, 1])  # z (x - 2)
    h = zx2 * Polynomial.of([0, mpq(1, 2)]) + zx2 * zx2 * mpq(1, 4) + Polynomial.of([0, 0, d])  # z^2 h
    num = Polynomial.of([-1, 0, 1]) * h
    return SpectralCurve.from_polynomials([1, 0, 1], list(num.coeffs), x_den=[0, 1], y_den=[0, 0, 0, 1],
                                          name=f"quartic-onecut(s={s})")


def build_quartic_onecut(coupling=None):
    """SingularFamily in t = s^2 tending to pure gravity at v = 1; t must be a rational square."""
    from .variation import SingularFamily

    def at(t):
        t = Q(t)
        root = sympy.sqrt(sympy.Rational(str(t)))
        if not root.is_Rational:
            raise ValueError("samples of t must be squares of rationals")
        return quartic_onecut_curve(Q(str(root)))

    singular = build_pq(PQModel(3, 2, {1: 3}))
    family = SingularFamily(at, singular, 3, 2, "quartic-onecut")
    if coupling is not None:
        return family.build(coupling)
    return family


# ------------------------------------------------------------ reference data


def to_pole_basis(expr, variables: Sequence, branch: int = 0) -> dict:
    """Expand a polynomial in the 1/variables into {((branch, d), ...): coeff}."""
    ws = sympy.symbols(f"w0:{len(variables)}")
    e = sympy.expand(sympy.together(expr).subs({v: 1 / w for v, w in zip(variables, ws)}))
    poly = sympy.Poly(sympy.cancel(e), *ws)
    out = {}
    for monom, c in poly.terms():
        out[tuple((branch, d) for d in monom)] = Q(str(c))
    return out


def pure_gravity_reference() -> dict:
    """{(k, g): pole-basis tensor} of the tabulated pure-gravity correlators at v = 1."""
    p = sympy.symbols("p1:6")
    P = lambda n: sympy.Mul(*[1 / p[i] ** 2 for i in range(n)])
    p1, p2 = p[0], p[1]
    data = {
        (3, 0): (-sympy.Rational(1, 6) * P(3), p[:3]),
        (1, 1): (-(p1 ** 2 + 3) / (144 * p1 ** 4), p[:1]),
        (2, 1): ((15 * p2 ** 4 + 15 * p1 ** 4 + 6 * p1 ** 4 * p2 ** 2 + 2 * p1 ** 4 * p2 ** 4 + 9 * p1 ** 2 * p2 ** 2
                  + 6 * p1 ** 2 * p2 ** 4) / (2 ** 5 * 3 ** 3 * p1 ** 6 * p2 ** 6), p[:2]),
        (1, 2): (-7 * (135 + 87 * p1 ** 2 + 36 * p1 ** 4 + 12 * p1 ** 6 + 4 * p1 ** 8) / (2 ** 10 * 3 ** 5 * p1 ** 10),
                 p[:1]),
        (4, 0): (P(4) / 9 * (1 + 3 * sum(1 / p[i] ** 2 for i in range(4))), p[:4]),
        (5, 0): (P(5) / 9 * (1 + 3 * sum(1 / p[i] ** 2 for i in range(5))
                             + 6 * sum(1 / (p[i] ** 2 * p[j] ** 2) for i in range(5) for j in range(i + 1, 5))
                             + 5 * sum(1 / p[i] ** 4 for i in range(5))), p[:5]),
    }
    return {key: to_pole_basis(expr, vs) for key, (expr, vs) in data.items()}


PURE_GRAVITY_F = {2: mpq(7, 51840)}
PURE_GRAVITY_DFDT1 = {1: mpq(-1, 144), 2: mpq(-7, 2 ** 8 * 3 ** 5)}


def kontsevich_reference(times: KontsevichTimes) -> dict:
    """Tabulated Kontsevich correlators in the pole basis at z = 0, and F^(2).

    The W_1^(2) bracket carries (2 - t_3)^3 on its z^2 group, the power forced
    by homogeneity in (2 - t_3, t_k).
    """
    t3, t5, t7, t9, t11 = (sympy.Rational(str(times.t(k))) for k in (3, 5, 7, 9, 11))
    z, z1, z2, z3 = sympy.symbols("z z1 z2 z3")
    u = 2 - t3
    w11 = -1 / (8 * u) * (1 / z ** 4 + t5 / (u * z ** 2))
    w30 = -1 / u / (z1 * z2 * z3) ** 2
    w21 = (u ** 2 * (5 * z1 ** 4 + 5 * z2 ** 4 + 3 * z1 ** 2 * z2 ** 2) + 6 * t5 ** 2 * z1 ** 4 * z2 ** 4
           + u * (6 * t5 * z1 ** 4 * z2 ** 2 + 6 * t5 * z1 ** 2 * z2 ** 4 + 5 * t7 * z1 ** 4 * z2 ** 4)) / (
              8 * u ** 4 * z1 ** 6 * z2 ** 6)
    w12 = -1 / (128 * u ** 7 * z ** 10) * (
        252 * t5 ** 4 * z ** 8 + 12 * t5 ** 2 * z ** 6 * u * (50 * t7 * z ** 2 + 21 * t5)
        + z ** 4 * u ** 2 * (252 * t5 ** 2 + 348 * t5 * t7 * z ** 2 + 145 * t7 ** 2 * z ** 4 + 308 * t5 * t9 * z ** 4)
        + z ** 2 * u ** 3 * (203 * t5 + 145 * z ** 2 * t7 + 105 * z ** 4 * t9 + 105 * z ** 6 * t11)
        + 105 * u ** 4)
    F2 = (252 * t5 ** 3 + 435 * t5 * t7 * u + 175 * t9 * u ** 2) / (1920 * u ** 5)
    return {
        (1, 1): to_pole_basis(w11, [z]),
        (3, 0): to_pole_basis(w30, [z1, z2, z3]),
        (2, 1): to_pole_basis(w21, [z1, z2]),
        (1, 2): to_pole_basis(w12, [z]),
        "F2": Q(str(F2)),
    }


def kontsevich_dF1_dt3(t3) -> mpq:
    """d/dt_3 of -(1/24) ln(1 - t_3/2)."""
    return 1 / (24 * (2 - Q(t3)))


def reference_tensor(k: int, g: int, terms: Mapping, locations=(mpq(0),)) -> MultiDifferential:
    return MultiDifferential.from_terms(k, g, terms, locations)
