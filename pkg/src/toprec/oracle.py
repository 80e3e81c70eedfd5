"""Pointwise evaluation of W_k^(g) and F^(g) by direct nested residues.

This path shares no representation with the recursion module: branch points,
conjugate points, kernels and residues are recomputed here with dense Laurent
series, and W is only ever evaluated at concrete points. Residue variables
are nested, t_1 outermost; a value depending on several of them is a series
in the deepest one whose coefficients are series in the shallower ones.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import sympy
from gmpy2 import mpq

from .curve import SpectralCurve
from .exactnum import INF, LaurentSeries, Polynomial, Q, TruncationError


class OracleError(ValueError):
    pass


# ------------------------------------------------------------ values over residue levels
# A value is (levels, obj): levels an increasing tuple of residue depths, obj an
# mpq when levels is empty, else a LaurentSeries in t_{levels[-1]} with
# coefficients that are objs over levels[:-1].


def _lift(obj, have: tuple, want: tuple):
    if not want:
        return obj
    inner = want[-1]
    if have and have[-1] == inner:
        return LaurentSeries([_lift(c, have[:-1], want[:-1]) for c in obj.coeffs], obj.val, obj.prec,
                             normalize=False)
    return LaurentSeries((_lift(obj, have, want[:-1]),), 0, INF)


def _union(*level_sets) -> tuple:
    return tuple(sorted(set().union(*level_sets)))


def vmul(a, b):
    levels = _union(a[0], b[0])
    return levels, _lift(a[1], a[0], levels) * _lift(b[1], b[0], levels)


def vadd(a, b):
    levels = _union(a[0], b[0])
    return levels, _lift(a[1], a[0], levels) + _lift(b[1], b[0], levels)


def vneg(a):
    return a[0], -a[1]


def vinv(a, prec: int):
    levels, obj = a
    if not levels:
        return levels, 1 / obj
    return levels, obj.inverse(prec=prec) if obj.prec == INF and len(obj.coeffs) > 1 else obj.inverse()


VZERO = ((), mpq(0))


# ------------------------------------------------------------ local data


@dataclass
class _Local:
    a: mpq
    sigma: LaurentSeries  # conjugate point q-bar = a + sigma(t)
    dsigma: LaurentSeries
    kernel_factor: LaurentSeries  # sigma'(t) / (2 (y(q) - y(q-bar)) x'(q))
    phi: LaurentSeries  # antiderivative of y dx vanishing at t = 0


def _shifted(p: Polynomial, a, prec) -> LaurentSeries:
    return LaurentSeries(list(p.shift(a).coeffs), 0, prec)


def _series_of(num: Polynomial, den: Polynomial, a, prec: int) -> LaurentSeries:
    n = _shifted(num, a, prec)
    d = _shifted(den, a, prec)
    return n.div(d, prec)


def _compose_poly_series(c: LaurentSeries, s: LaurentSeries, prec: int) -> LaurentSeries:
    """c(s(t)) for s of valuation >= 1 by Horner."""
    out = LaurentSeries((), 0, prec)
    top = c.val + len(c.coeffs) - 1
    for n in range(top, -1, -1):
        out = (out * s).truncate(prec) + c[n]
    return out.truncate(prec)


def _conjugate(xs: LaurentSeries, prec: int) -> LaurentSeries:
    """sigma(t) with x(a + sigma) = x(a + t), sigma = -t + O(t^2).

    Writes (x(a+s) - x(a+t))/(s - t) = sum_n c_n h_{n-1}(s, t), with h the
    complete homogeneous polynomials, and iterates s = -t - (sum_{n>=3} c_n h_{n-1}) / c_2;
    each pass fixes one more order.
    """
    c2 = xs[2]
    t = LaurentSeries.monomial(1, mpq(1))
    s = LaurentSeries((mpq(-1),), 1, prec)
    top = min(xs.val + len(xs.coeffs) - 1, prec + 1)
    for _ in range(prec + 1):
        # h_{m}(s, t) = sum_{i=0}^{m} s^i t^(m-i)
        acc = LaurentSeries((), 0, prec)
        spow = [LaurentSeries.monomial(0, mpq(1))]
        for i in range(1, top):
            spow.append((spow[-1] * s).truncate(prec))
        for n in range(3, top + 1):
            cn = xs[n]
            if cn == 0:
                continue
            h = LaurentSeries((), 0, prec)
            for i in range(n):
                h = h + spow[i].shift(n - 1 - i)
            acc = acc + h.truncate(prec).scale(cn)
        new = (-t - acc.scale(1 / c2)).truncate(prec)
        if new.coeffs == s.coeffs and new.val == s.val:
            break
        s = new
    return LaurentSeries(s.coeffs, s.val, prec)


def branch_points(curve: SpectralCurve) -> list[mpq]:
    """Zeros of dx, recomputed with sympy; they must be rational and simple."""
    z = sympy.symbols("z")
    num = sum(sympy.Rational(str(c)) * z ** i for i, c in enumerate(curve.x.num.coeffs))
    den = sum(sympy.Rational(str(c)) * z ** i for i, c in enumerate(curve.x.den.coeffs))
    dnum = sympy.numer(sympy.together(sympy.diff(num / den, z)))
    poly = sympy.Poly(dnum, z)
    if poly.degree() <= 0:
        raise OracleError("dx has no zeros")
    roots = sympy.roots(poly)
    out = []
    for r, mult in roots.items():
        if not r.is_Rational:
            raise OracleError(f"irrational zero of dx: {r}")
        if mult != 1:
            raise OracleError(f"zero of dx at {r} is not simple")
        out.append(Q(str(r)))
    if sum(roots.values()) != poly.degree():
        raise OracleError("dx has zeros that sympy could not find")
    return sorted(out)


def _local(curve: SpectralCurve, a: mpq, prec: int) -> _Local:
    xs = _series_of(curve.x.num, curve.x.den, a, prec + 4)
    ys = _series_of(curve.y.num, curve.y.den, a, prec + 4)
    sigma = _conjugate(xs, prec + 3)
    dsigma = sigma.derivative()
    dx = xs.derivative()
    y_bar = _compose_poly_series(ys, sigma, prec + 3)
    denom = ((ys - y_bar) * dx).truncate(prec + 3)
    factor = dsigma.div(denom.scale(mpq(2)), prec)
    phi = (ys * dx).truncate(prec + 3).integral()
    return _Local(a, sigma, dsigma, factor, phi)


# ------------------------------------------------------------ evaluator


@dataclass(frozen=True)
class PointEvaluation:
    curve: SpectralCurve
    points: tuple
    value: mpq


class _Evaluator:
    def __init__(self, curve: SpectralCurve, prec: int):
        self.curve = curve
        self.prec = prec
        self.bps = branch_points(curve)
        self.local = [_local(curve, a, prec) for a in self.bps]
        self.memo: dict = {}

    # points: ("r", z) or ("s", level, branch, sign)
    def _offset(self, pt, i: int):
        """pt - a_i as a value."""
        a = self.bps[i]
        if pt[0] == "r":
            return (), pt[1] - a
        _, lvl, j, sign = pt
        t = LaurentSeries.monomial(1, mpq(1))
        base = t if sign > 0 else self.local[j].sigma
        return (lvl,), base + (self.bps[j] - a)

    def _geometric(self, s: LaurentSeries, lvl: int, P, weight, extra: int):
        """sum_n weight(n) s^n P^(-n-1-extra), s a series in t_lvl, P a value over shallower levels."""
        out = VZERO
        spow = LaurentSeries.monomial(0, mpq(1))
        Pinv = vinv(P, self.prec)
        Ppow = Pinv
        for _ in range(extra):
            Ppow = vmul(Ppow, Pinv)
        for n in range(self.prec):
            series = ((lvl,), spow.truncate(self.prec).scale(mpq(weight(n))))
            out = vadd(out, vmul(series, Ppow))
            spow = (spow * s).truncate(self.prec)
            Ppow = vmul(Ppow, Pinv)
        return out

    def bergmann(self, u, v):
        """B(u, v) / (du dv)."""
        if u[0] == "r" and v[0] == "r":
            if u[1] == v[1]:
                raise OracleError("coincident points")
            return (), 1 / (u[1] - v[1]) ** 2
        lu = u[1] if u[0] == "s" else 0
        lv = v[1] if v[0] == "s" else 0
        if lu == lv:
            # both at the same residue level: q and q-bar of one vertex
            su = self._offset(u, u[2])[1]
            sv = self._offset(v, u[2])[1]
            d = su - sv
            return (lu,), (d * d).inverse(prec=self.prec)
        if lu < lv:
            u, v, lu, lv = v, u, lv, lu
        i = u[2]
        s = self._offset(u, i)[1]
        P = self._offset(v, i)
        return self._geometric(s, lu, P, lambda n: n + 1, 1)

    def kernel(self, p, i: int, lvl: int):
        """(int_q^qbar B(., p)) / (2 omega(q)) * dqbar/dq at q = a_i + t_lvl, dp and dt stripped."""
        loc = self.local[i]
        t = LaurentSeries.monomial(1, mpq(1))
        P = self._offset(p, i)
        d1 = self._geometric(t, lvl, P, lambda n: 1, 0)
        d2 = self._geometric(loc.sigma, lvl, P, lambda n: 1, 0)
        diff = vadd(d2, vneg(d1))
        return vmul(diff, ((lvl,), loc.kernel_factor))

    def W(self, m: int, h: int, args: tuple):
        key = (m, h, args)
        if key in self.memo:
            return self.memo[key]
        if (m, h) == (1, 0) or m < 1 or h < 0:
            out = VZERO
        elif (m, h) == (2, 0):
            out = self.bergmann(args[0], args[1])
        else:
            out = self._recurse(m, h, args)
        self.memo[key] = out
        return out

    def _recurse(self, m: int, h: int, args: tuple):
        p, rest = args[0], args[1:]
        lvl = 1 + max((a[1] for a in args if a[0] == "s"), default=0)
        n = len(rest)
        total = VZERO
        for i in range(len(self.bps)):
            q = ("s", lvl, i, 1)
            qb = ("s", lvl, i, -1)
            F = VZERO
            if h >= 1:
                F = vadd(F, self.W(m + 1, h - 1, (q, qb) + rest))
            for size in range(n + 1):
                for J in itertools.combinations(range(n), size):
                    comp = tuple(r for r in range(n) if r not in J)
                    for h1 in range(h + 1):
                        if (size, h1) == (0, 0) or (n - size, h - h1) == (0, 0):
                            continue
                        A = self.W(size + 1, h1, (q,) + tuple(rest[r] for r in J))
                        B = self.W(n - size + 1, h - h1, (qb,) + tuple(rest[r] for r in comp))
                        F = vadd(F, vmul(A, B))
            integrand = vmul(self.kernel(p, i, lvl), F)
            total = vadd(total, _residue_at(integrand, lvl))
        return total

    def F(self, g: int):
        total = mpq(0)
        for i, loc in enumerate(self.local):
            w1 = self.W(1, g, (("s", 1, i, 1),))
            integrand = vmul(((1,), loc.phi), w1)
            levels, r = _residue_at(integrand, 1)
            if levels:
                raise OracleError("free energy depends on a residue variable")
            total += r
        return total / (2 * g - 2)


def _residue_at(value, lvl: int):
    levels, obj = value
    if not levels or levels[-1] != lvl:
        return VZERO
    return levels[:-1], obj[-1]


def _validate_points(curve: SpectralCurve, points: Sequence) -> tuple:
    pts = tuple(Q(z) for z in points)
    if len(set(pts)) != len(pts):
        raise OracleError("evaluation points must be distinct")
    bps = set(branch_points(curve))
    if any(z in bps for z in pts):
        raise OracleError("evaluation point at a branch point")
    return pts


def _with_retries(curve, fn, start: int, attempts: int = 4):
    prec = start
    last = None
    for _ in range(attempts):
        try:
            return fn(_Evaluator(curve, prec))
        except (TruncationError, ZeroDivisionError) as e:
            last = e
            prec *= 2
    raise OracleError(f"series truncation insufficient after {attempts} attempts: {last}")


def eval_W_direct(curve: SpectralCurve, k: int, g: int, points: Sequence, prec: int | None = None) -> mpq:
    """The scalar w_k^(g)(z_1..z_k) with all dz factors stripped."""
    if len(points) != k:
        raise OracleError(f"need {k} points, got {len(points)}")
    pts = _validate_points(curve, points)
    args = tuple(("r", z) for z in pts)

    def run(ev):
        levels, value = ev.W(k, g, args)
        assert not levels
        return value

    return _with_retries(curve, run, prec or 6 * g + 2 * k + 4)


def evaluate(curve: SpectralCurve, k: int, g: int, points: Sequence) -> PointEvaluation:
    pts = _validate_points(curve, points)
    return PointEvaluation(curve, pts, eval_W_direct(curve, k, g, pts))


def eval_F_direct(curve: SpectralCurve, g: int, prec: int | None = None) -> mpq:
    if g < 2:
        raise OracleError("the direct free energy covers g >= 2")
    return _with_retries(curve, lambda ev: ev.F(g), prec or 6 * g + 6)
