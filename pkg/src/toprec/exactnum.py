"""Exact coefficient rings and truncated Laurent series.

Two scalar rings are supported: gmpy2 rationals and first-order dual numbers
over them. Every series carries an explicit truncation order; operations
propagate the tightest valid order and consumers fail loudly when asked for
a coefficient that is not known.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from gmpy2 import mpq

INF = math.inf


class TruncationError(ArithmeticError):
    """A coefficient outside the known window of a series was requested."""


def Q(value) -> mpq:
    """Coerce ints, strings like '-3/4', Fractions and mpq to an exact rational."""
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational string")
        return mpq(text)
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; pass an exact rational")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def qstr(value) -> str:
    """Canonical 'num/den' (or 'num') string of a rational."""
    value = Q(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, slots=True)
class Dual:
    """a + b*eps with eps**2 = 0."""

    value: mpq
    deriv: mpq

    @staticmethod
    def lift(x) -> "Dual":
        if isinstance(x, Dual):
            return x
        return Dual(Q(x), mpq(0))

    @staticmethod
    def variable(x) -> "Dual":
        return Dual(Q(x), mpq(1))

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.deriv + other.deriv)
        if isinstance(other, (int, type(mpq(0)), Fraction)):
            return Dual(self.value + other, self.deriv)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, -self.deriv)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.deriv - other.deriv)
        if isinstance(other, (int, type(mpq(0)), Fraction)):
            return Dual(self.value - other, self.deriv)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, type(mpq(0)), Fraction)):
            return Dual(other - self.value, -self.deriv)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value * other.value,
                        self.value * other.deriv + self.deriv * other.value)
        if isinstance(other, (int, type(mpq(0)), Fraction)):
            return Dual(self.value * other, self.deriv * other)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "Dual":
        if self.value == 0:
            raise ZeroDivisionError("dual number with zero value part is not invertible")
        inv = 1 / self.value
        return Dual(inv, -self.deriv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * other.inverse()
        if isinstance(other, (int, type(mpq(0)), Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return Dual(self.value / other, self.deriv / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, type(mpq(0)), Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return Dual(mpq(1), mpq(0))
        return Dual(self.value ** n, n * self.value ** (n - 1) * self.deriv)

    def __eq__(self, other):
        if isinstance(other, Dual):
            return self.value == other.value and self.deriv == other.deriv
        if isinstance(other, (int, type(mpq(0)), Fraction)):
            return self.deriv == 0 and self.value == other
        return NotImplemented

    def __hash__(self):
        if self.deriv == 0:
            return hash(self.value)
        return hash((self.value, self.deriv))

    def __bool__(self):
        return bool(self.value) or bool(self.deriv)

    def __repr__(self):
        return f"Dual({qstr(self.value)}, {qstr(self.deriv)})"

    def __str__(self):
        return f"{qstr(self.value)} + {qstr(self.deriv)}*eps"


def value_part(x):
    return x.value if isinstance(x, Dual) else x


def deriv_part(x):
    return x.deriv if isinstance(x, Dual) else mpq(0)


def is_dual(x) -> bool:
    return isinstance(x, Dual)


def ring_tag(values: Iterable) -> str:
    return "dual" if any(isinstance(v, Dual) for v in values) else "rational"


def log_derivative(x) -> mpq:
    """eps-part of log(x) for a dual x with nonzero value."""
    if value_part(x) == 0:
        raise ZeroDivisionError("logarithm of a quantity with zero value part")
    return deriv_part(x) / value_part(x)


def exact_root(c, d: int) -> mpq | None:
    """Rational d-th root of a rational, or None when it is irrational."""
    c = Q(c)
    if c == 0:
        return mpq(0)
    sign = 1
    if c < 0:
        if d % 2 == 0:
            return None
        sign, c = -1, -c
    import gmpy2

    num, exact_n = gmpy2.iroot(gmpy2.mpz(c.numerator), d)
    den, exact_d = gmpy2.iroot(gmpy2.mpz(c.denominator), d)
    if not (exact_n and exact_d):
        return None
    return sign * mpq(num, den)


def dual_root(c, d: int):
    """d-th root in the scalar ring (value part must have a rational root)."""
    if isinstance(c, Dual):
        r = exact_root(c.value, d)
        if r is None or r == 0:
            return None
        return Dual(r, c.deriv / (d * r ** (d - 1)))
    return exact_root(c, d)


# ---------------------------------------------------------------- polynomials


def _trim(coeffs: Sequence) -> tuple:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class Polynomial:
    """Dense univariate polynomial, ascending coefficients."""

    coeffs: tuple
    var: str = "z"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @staticmethod
    def of(coeffs: Iterable, var: str = "z") -> "Polynomial":
        return Polynomial(tuple(c if isinstance(c, Dual) else Q(c) for c in coeffs), var)

    @staticmethod
    def constant(c, var: str = "z") -> "Polynomial":
        return Polynomial((c,), var)

    @staticmethod
    def monomial(n: int, c=1, var: str = "z") -> "Polynomial":
        return Polynomial((mpq(0),) * n + (c,), var)

    @staticmethod
    def from_roots(roots: Iterable, var: str = "z") -> "Polynomial":
        p = Polynomial((mpq(1),), var)
        for r in roots:
            p = p * Polynomial((-r, mpq(1)), var)
        return p

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, n: int):
        if 0 <= n < len(self.coeffs):
            return self.coeffs[n]
        return mpq(0)

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial((other,), self.var)

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(tuple(self[i] + other[i] for i in range(n)), self.var)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(tuple(-c for c in self.coeffs), self.var)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(tuple(c * other for c in self.coeffs), self.var)
        if self.is_zero() or other.is_zero():
            return Polynomial((), self.var)
        out = [mpq(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(tuple(out), self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Polynomial((mpq(1),), self.var)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        return self.coeffs == _trim((other,))

    def __hash__(self):
        return hash(self.coeffs)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        lead = other.coeffs[-1]
        dq = len(rem) - len(other.coeffs) + 1
        quo = [mpq(0)] * max(dq, 0)
        for k in range(dq - 1, -1, -1):
            c = rem[k + len(other.coeffs) - 1] / lead
            quo[k] = c
            if c != 0:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        return Polynomial(tuple(quo), self.var), Polynomial(tuple(rem[: len(other.coeffs) - 1]), self.var)

    def __call__(self, x):
        acc = mpq(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0), self.var)

    def shift(self, a) -> "Polynomial":
        """The polynomial t -> p(a + t)."""
        out = Polynomial((), self.var)
        base = Polynomial((a, mpq(1)), self.var)
        for c in reversed(self.coeffs):
            out = out * base + c
        return out

    def compose(self, inner: "Polynomial") -> "Polynomial":
        out = Polynomial((), self.var)
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    def map(self, f: Callable) -> "Polynomial":
        return Polynomial(tuple(f(c) for c in self.coeffs), self.var)

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            cs = qstr(c) if not isinstance(c, Dual) else f"({c})"
            parts.append(cs if i == 0 else f"{cs}*{self.var}^{i}")
        return " + ".join(parts)


# ------------------------------------------------------------- Laurent series


def _is_exact_int(x) -> bool:
    return x != INF


class LaurentSeries:
    """sum_n c_n t^n for val <= n < prec, with everything at or above prec unknown.

    prec may be INF for series that are known exactly (finitely many terms).
    Coefficients may be rationals, duals, or themselves LaurentSeries in an
    outer variable (nested expansions used by the oracle).
    """

    __slots__ = ("coeffs", "val", "prec", "center")

    def __init__(self, coeffs: Sequence, val: int, prec, center=mpq(0), *, normalize: bool = True):
        coeffs = list(coeffs)
        if prec != INF:
            prec = int(prec)
            keep = max(prec - val, 0)
            del coeffs[keep:]
        if normalize:
            lead = 0
            while lead < len(coeffs) and _coeff_is_zero(coeffs[lead]):
                lead += 1
            if lead:
                coeffs = coeffs[lead:]
                val += lead
            while coeffs and _coeff_is_zero(coeffs[-1]):
                coeffs.pop()
        if not coeffs:
            val = prec if prec != INF else 0
        self.coeffs = tuple(coeffs)
        self.val = val
        self.prec = prec
        self.center = center

    # construction helpers
    @staticmethod
    def exact(coeffs: Sequence, val: int = 0, center=mpq(0)) -> "LaurentSeries":
        return LaurentSeries(coeffs, val, INF, center)

    @staticmethod
    def monomial(n: int, c=1, center=mpq(0)) -> "LaurentSeries":
        return LaurentSeries((c,), n, INF, center)

    @staticmethod
    def zero(prec=INF, center=mpq(0)) -> "LaurentSeries":
        return LaurentSeries((), 0, prec, center)

    @staticmethod
    def from_polynomial(p: Polynomial, prec=INF, center=mpq(0)) -> "LaurentSeries":
        return LaurentSeries(p.coeffs, 0, prec, center)

    @staticmethod
    def from_function(f: Callable[[int], object], val: int, prec: int, center=mpq(0)) -> "LaurentSeries":
        return LaurentSeries([f(n) for n in range(val, prec)], val, prec, center)

    # basic queries
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def valuation(self):
        return self.val

    def is_exact(self) -> bool:
        return self.prec == INF

    def __getitem__(self, n: int):
        if n >= self.prec:
            raise TruncationError(f"coefficient t^{n} requested but series is known only below t^{self.prec}")
        i = n - self.val
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return _zero_like(self.coeffs)

    def leading(self):
        if not self.coeffs:
            raise ZeroDivisionError("series is zero up to its truncation")
        return self.coeffs[0]

    def terms(self):
        for i, c in enumerate(self.coeffs):
            if not _coeff_is_zero(c):
                yield self.val + i, c

    def truncate(self, prec) -> "LaurentSeries":
        return LaurentSeries(self.coeffs, self.val, min(prec, self.prec), self.center)

    def _check(self, other: "LaurentSeries"):
        if self.center != other.center:
            raise ValueError(f"series centered at {self.center} and {other.center} cannot be combined")

    def _coerce(self, other) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            self._check(other)
            return other
        return LaurentSeries((other,), 0, INF, self.center)

    # ring operations
    def __add__(self, other):
        if not isinstance(other, LaurentSeries) and _is_scalar(other):
            other = self._coerce(other)
        elif not isinstance(other, LaurentSeries):
            return NotImplemented
        self._check(other)
        prec = min(self.prec, other.prec)
        if self.is_zero() and other.is_zero():
            return LaurentSeries((), 0, prec, self.center)
        lo = min(s.val for s in (self, other) if not s.is_zero())
        hi = max(s.val + len(s.coeffs) for s in (self, other) if not s.is_zero())
        if prec != INF:
            hi = min(hi, prec)
        out = []
        for n in range(lo, hi):
            out.append(_get(self, n) + _get(other, n))
        return LaurentSeries(out, lo, prec, self.center)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries([-c for c in self.coeffs], self.val, self.prec, self.center, normalize=False)

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries) and not _is_scalar(other):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "LaurentSeries":
        if _coeff_is_zero(c) and not isinstance(c, LaurentSeries):
            return LaurentSeries((), 0, self.prec, self.center)
        return LaurentSeries([a * c for a in self.coeffs], self.val, self.prec, self.center)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            if _is_scalar(other):
                return self.scale(other)
            return NotImplemented
        self._check(other)
        a, b = self, other
        # precision: min over the cross terms
        prec = min(a.prec + (b.val if not b.is_zero() else b.prec if b.prec != INF else 0),
                   b.prec + (a.val if not a.is_zero() else a.prec if a.prec != INF else 0))
        if a.is_zero() or b.is_zero():
            if a.is_zero() and b.is_zero():
                p = a.prec + b.prec
            elif a.is_zero():
                p = a.prec + b.val
            else:
                p = b.prec + a.val
            return LaurentSeries((), 0, p, self.center)
        lo = a.val + b.val
        hi = a.val + len(a.coeffs) + b.val + len(b.coeffs) - 1
        if prec != INF:
            hi = min(hi, prec)
        n_out = hi - lo
        if n_out <= 0:
            return LaurentSeries((), 0, prec, self.center)
        ac, bc = a.coeffs, b.coeffs
        out = [None] * n_out
        nb = len(bc)
        for k in range(n_out):
            s = None
            i0 = max(0, k - nb + 1)
            i1 = min(k, len(ac) - 1)
            for i in range(i0, i1 + 1):
                x = ac[i]
                y = bc[k - i]
                term = x * y
                s = term if s is None else s + term
            out[k] = s if s is not None else _zero_like(ac)
        return LaurentSeries(out, lo, prec, self.center)

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        return NotImplemented

    def inverse(self, prec=None) -> "LaurentSeries":
        """Multiplicative inverse.

        The relative precision of the result equals that of the input. For an
        exactly known multi-term input the caller must give an absolute prec.
        """
        if self.is_zero():
            raise ZeroDivisionError("division by a series that is zero up to its truncation")
        v = self.val
        if self.prec == INF:
            if len(self.coeffs) == 1:
                return LaurentSeries((_scalar_inverse(self.coeffs[0]),), -v, INF, self.center)
            if prec is None:
                raise TruncationError("inverse of an exact multi-term series needs an explicit truncation order")
            rel = prec + v
        else:
            rel = self.prec - v
            if prec is not None:
                rel = min(rel, prec + v)
        rel = int(rel)
        if rel <= 0:
            return LaurentSeries((), 0, -v + rel, self.center)
        c = self.coeffs
        inv0 = _scalar_inverse(c[0])
        out = [inv0]
        for n in range(1, rel):
            s = None
            for k in range(1, min(n, len(c) - 1) + 1):
                term = c[k] * out[n - k]
                s = term if s is None else s + term
            out.append(-(s * inv0) if s is not None else _zero_like(c))
        return LaurentSeries(out, -v, -v + rel, self.center)

    def __truediv__(self, other):
        if not isinstance(other, LaurentSeries):
            if _is_scalar(other):
                return self.scale(_scalar_inverse(other))
            return NotImplemented
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("division by a series that is zero up to its truncation")
        if other.prec == INF and len(other.coeffs) > 1:
            if self.prec == INF:
                raise TruncationError("exact division by a multi-term series needs div(..., prec=)")
            rel = self.prec - (self.val if not self.is_zero() else self.prec)
            inv = other.inverse(prec=rel - other.val if not self.is_zero() else 0)
            return self * inv
        return self * other.inverse()

    def div(self, other: "LaurentSeries", prec) -> "LaurentSeries":
        other = self._coerce(other)
        target_rel = prec - (self.val - other.val) if not self.is_zero() else 0
        inv = other.inverse(prec=target_rel - other.val)
        return (self * inv).truncate(prec)

    def __rtruediv__(self, other):
        if _is_scalar(other):
            return self.inverse().scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = LaurentSeries.monomial(0, _one_like(self.coeffs), self.center)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by t**k."""
        return LaurentSeries(self.coeffs, self.val + k, self.prec + k, self.center)

    def derivative(self) -> "LaurentSeries":
        out = [c * (self.val + i) for i, c in enumerate(self.coeffs)]
        return LaurentSeries(out, self.val - 1, self.prec - 1, self.center)

    def integral(self) -> "LaurentSeries":
        """Antiderivative with zero constant term; the t^-1 coefficient must vanish."""
        if self.prec <= -1:
            raise TruncationError("antiderivative needs the t^-1 coefficient")
        out = []
        for i, c in enumerate(self.coeffs):
            n = self.val + i
            if n == -1:
                if not _coeff_is_zero(c):
                    raise ValueError("series has a t^-1 term; antiderivative is not a Laurent series")
                out.append(_zero_like(self.coeffs))
            else:
                out.append(c / (n + 1) if not isinstance(c, LaurentSeries) else c.scale(mpq(1, n + 1)))
        return LaurentSeries(out, self.val + 1, self.prec + 1, self.center)

    def compose(self, inner: "LaurentSeries", prec=None) -> "LaurentSeries":
        """self(inner(t)) for inner of valuation >= 1."""
        return series_compose(self, inner, prec)

    def map(self, f: Callable) -> "LaurentSeries":
        return LaurentSeries([f(c) for c in self.coeffs], self.val, self.prec, self.center)

    def residue(self):
        return residue(self)

    def __eq__(self, other):
        if isinstance(other, LaurentSeries):
            return (self.coeffs == other.coeffs and self.val == other.val
                    and self.prec == other.prec and self.center == other.center)
        return NotImplemented

    def agrees_with(self, other: "LaurentSeries") -> bool:
        """Equality of the coefficients both series know."""
        prec = min(self.prec, other.prec)
        lo = min(self.val, other.val)
        hi = prec if prec != INF else max(self.val + len(self.coeffs), other.val + len(other.coeffs))
        return all(_get(self, n) == _get(other, n) for n in range(lo, hi))

    def __hash__(self):
        return hash((self.coeffs, self.val, self.prec))

    def __repr__(self):
        parts = []
        for n, c in self.terms():
            parts.append(f"({c})*t^{n}")
        body = " + ".join(parts) if parts else "0"
        tail = "" if self.prec == INF else f" + O(t^{self.prec})"
        return body + tail


def _is_scalar(x) -> bool:
    return isinstance(x, (int, type(mpq(0)), Fraction, Dual))


def _coeff_is_zero(c) -> bool:
    if isinstance(c, LaurentSeries):
        return c.is_zero()
    return c == 0


def _zero_like(coeffs):
    for c in coeffs:
        if isinstance(c, LaurentSeries):
            return LaurentSeries((), 0, INF, c.center)
        break
    return mpq(0)


def _one_like(coeffs):
    for c in coeffs:
        if isinstance(c, LaurentSeries):
            return LaurentSeries.monomial(0, _one_like(c.coeffs), c.center)
        break
    return mpq(1)


def _scalar_inverse(c):
    if isinstance(c, LaurentSeries):
        return c.inverse()
    if isinstance(c, Dual):
        return c.inverse()
    if c == 0:
        raise ZeroDivisionError("leading coefficient is zero")
    return 1 / Q(c) if not isinstance(c, type(mpq(0))) else 1 / c


def _get(s: LaurentSeries, n: int):
    i = n - s.val
    if 0 <= i < len(s.coeffs):
        return s.coeffs[i]
    if n >= s.prec:
        raise TruncationError(f"coefficient t^{n} beyond truncation t^{s.prec}")
    return _zero_like(s.coeffs)


def residue(s: LaurentSeries):
    """Coefficient of t^-1."""
    if s.prec <= -1:
        raise TruncationError(f"residue needs t^-1 but series is known only below t^{s.prec}")
    return s[-1]


def series_arith(a: LaurentSeries, b: LaurentSeries, op: str) -> LaurentSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown series operation {op!r}")


def series_compose(outer: LaurentSeries, inner: LaurentSeries, prec=None) -> LaurentSeries:
    """outer(inner(t)); inner must have valuation >= 1.

    A negative-valuation outer needs inner to be invertible; for an exactly
    known multi-term inner that requires an explicit prec.
    """
    if inner.is_zero() or inner.val < 1:
        raise ValueError("inner series must have valuation >= 1")
    vi = inner.val
    if outer.is_zero():
        p = INF if outer.prec == INF else outer.prec * vi
        return LaurentSeries((), 0, p if prec is None else min(p, prec), inner.center)
    vo = outer.val
    pc = outer.coeffs
    rel = outer.prec - vo if outer.prec != INF else INF
    zero = _zero_like(pc)
    inner_prec = None if prec is None else prec - vo * vi
    if rel == INF:
        acc = LaurentSeries((pc[-1],), 0, INF, inner.center)
        top = len(pc) - 1
    else:
        rel = int(rel)
        top = rel - 1
        acc = LaurentSeries((pc[top] if top < len(pc) else zero,), 0, vi, inner.center)
    for n in range(top - 1, -1, -1):
        acc = acc * inner + LaurentSeries((pc[n] if n < len(pc) else zero,), 0, INF, inner.center)
        if inner_prec is not None:
            acc = acc.truncate(inner_prec)
    if vo > 0:
        acc = acc * inner ** vo
    elif vo < 0:
        m = -vo
        if inner.prec == INF and len(inner.coeffs) > 1:
            if prec is None:
                raise TruncationError("composition with a pole and an exact multi-term inner series needs prec")
            inv = inner.inverse(prec=prec + (m - 1) * vi)
        else:
            inv = inner.inverse()
        acc = acc * inv ** m
    if prec is not None:
        acc = acc.truncate(prec)
    return acc


# ---------------------------------------------------------- implicit solving


BivariatePoly = dict  # {(i, j): c} meaning sum c * s^i * t^j


def eval_bivariate(F: BivariatePoly, s: LaurentSeries, t_prec) -> LaurentSeries:
    """F(s(t), t) as a series."""
    center = s.center
    total = LaurentSeries((), 0, INF, center)
    max_i = max(i for i, _ in F) if F else 0
    powers = [LaurentSeries.monomial(0, 1, center)]
    for _ in range(max_i):
        powers.append((powers[-1] * s).truncate(t_prec))
    for (i, j), c in F.items():
        if c == 0:
            continue
        total = total + powers[i].shift(j).scale(c)
    return total.truncate(t_prec)


def series_solve(F: BivariatePoly, s0, s1, prec: int) -> LaurentSeries:
    """Power series s(t) = s0 + s1 t + ... with F(s(t), t) = 0, to O(t^prec).

    Substitutes s = s0 + t*u, strips the common power of t, and runs Newton
    iteration on the reduced equation with the order doubling each step.
    """
    # H(u, t) = F(s0 + t u, t)
    H: dict = {}
    for (i, j), c in F.items():
        if c == 0:
            continue
        # (s0 + t u)^i = sum_m C(i, m) s0^(i-m) t^m u^m
        for m in range(i + 1):
            coef = c * math.comb(i, m) * (s0 ** (i - m) if i - m else 1)
            if coef == 0:
                continue
            key = (m, j + m)
            H[key] = H.get(key, 0) + coef
    H = {k: v for k, v in H.items() if v != 0}
    if not H:
        raise ValueError("equation vanishes identically")
    shift = min(j for _, j in H)
    Ht = {(i, j - shift): c for (i, j), c in H.items()}
    base = {i: c for (i, j), c in Ht.items() if j == 0}
    f0 = sum(c * s1 ** i for i, c in base.items())
    df0 = sum(i * c * s1 ** (i - 1) for i, c in base.items() if i > 0)
    if f0 != 0:
        raise ValueError("seed does not satisfy the equation at leading order")
    if df0 == 0:
        raise ValueError("degenerate Jacobian at the seed; the branch point is not simple")
    dHt = {(i - 1, j): i * c for (i, j), c in Ht.items() if i > 0}
    need = prec - 1  # u to O(t^need)
    u = LaurentSeries((s1,), 0, 1)
    cur = 1
    while cur < need:
        cur = min(2 * cur, need)
        u = u.truncate(cur)
        u = LaurentSeries(u.coeffs, u.val, cur)
        h = eval_bivariate(Ht, u, cur)
        dh = eval_bivariate(dHt, u, cur)
        u = (u - (h / dh)).truncate(cur)
    if need <= 0:
        u = LaurentSeries((), 0, max(need, 0))
    s = u.shift(1) + LaurentSeries((s0,), 0, INF)
    return s.truncate(prec)


def solve_implicit(F: BivariatePoly, s0, s1, prec: int) -> LaurentSeries:
    return series_solve(F, s0, s1, prec)


def rational_series(num: Polynomial, den: Polynomial, a, prec: int) -> LaurentSeries:
    """Laurent expansion of num(a+t)/den(a+t) to O(t^prec)."""
    n = LaurentSeries.from_polynomial(num.shift(a))
    d = LaurentSeries.from_polynomial(den.shift(a))
    if d.is_zero():
        raise ZeroDivisionError("denominator vanishes identically")
    if n.is_zero():
        return LaurentSeries((), 0, prec)
    return n.div(d, prec)
