"""Topological recursion on genus-0 curves in the pole basis.

A correlator W_k^(g) is stored as a tensor over products of the forms
dz/(z - a_i)^d. The recursion kernel dE_q(p)/omega(q) near a branch point is
expanded in the same basis in p, so each recursion step reduces to residues
of products of local series:

    R_i[d; b1, b2] = Res_{t=0} K_d(t) f_b1(a_i + t) f_b2(a_i + s(t)) s'(t)

with K_d = (s^(d-1) - t^(d-1)) / (2 omega) the coefficient of dp/(p - a_i)^d
in the kernel and f_b the basis function of the inner factor evaluated at q or
at its conjugate qbar = a_i + s(t).
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .curve import BranchPoint, CurveError, SpectralCurve, analyze_poles
from .exactnum import (
    INF,
    Dual,
    LaurentSeries,
    TruncationError,
    deriv_part,
    log_derivative,
    qstr,
    value_part,
)

Index = tuple  # (branch point index, pole order)


class RecursionError(ArithmeticError):
    pass


class UnsupportedRegimeError(ValueError):
    pass


def pole_order_bound(k: int, g: int) -> int:
    return 6 * g + 2 * k - 4


def _zero():
    return mpq(0)


# ------------------------------------------------------------ multidifferential


@dataclass(frozen=True, eq=False)
class MultiDifferential:
    """sum coeff * prod_j dz_j / (z_j - a_{i_j})^{d_j} over the stored keys.

    The genus-0 two-point function is the Bergmann kernel dz1 dz2/(z1 - z2)^2,
    which lies outside the basis; it is flagged rather than expanded.
    """

    k: int
    g: int
    terms: Mapping[tuple, object]
    locations: tuple = ()
    bergmann: bool = False

    @staticmethod
    def zero(k: int, g: int, locations=()) -> "MultiDifferential":
        return MultiDifferential(k, g, {}, tuple(locations))

    @staticmethod
    def from_terms(k: int, g: int, terms: Mapping, locations=()) -> "MultiDifferential":
        clean = {tuple(key): c for key, c in terms.items() if c != 0}
        return MultiDifferential(k, g, dict(sorted(clean.items())), tuple(locations))

    def is_zero(self) -> bool:
        return not self.bergmann and not self.terms

    def __getitem__(self, key):
        return self.terms.get(tuple(key), mpq(0))

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def max_pole_order(self) -> int:
        return max((d for key in self.terms for _, d in key), default=0)

    def pole_orders_at(self, slot: int, i: int) -> set:
        return {key[slot][1] for key in self.terms if key[slot][0] == i}

    def evaluate(self, points: Sequence):
        """Scalar value with the dz factors stripped."""
        if len(points) != self.k:
            raise ValueError(f"expected {self.k} points")
        if self.bergmann:
            return 1 / (points[0] - points[1]) ** 2
        total = mpq(0)
        inv = {}
        for key, c in self.terms.items():
            term = c
            for z, (i, d) in zip(points, key):
                base = inv.get((z, i))
                if base is None:
                    base = 1 / (z - self.locations[i])
                    inv[(z, i)] = base
                term = term * base ** d
            total = total + term
        return total

    def evaluate_partial(self, points: Sequence, slot: int):
        """d/dz_slot of the scalar value at the given points."""
        if self.bergmann:
            diff = points[0] - points[1]
            return (-2 if slot == 0 else 2) / diff ** 3
        total = mpq(0)
        for key, c in self.terms.items():
            term = c
            for pos, (z, (i, d)) in enumerate(zip(points, key)):
                base = 1 / (z - self.locations[i])
                term = term * (-d * base ** (d + 1) if pos == slot else base ** d)
            total = total + term
        return total

    def scale(self, c) -> "MultiDifferential":
        return MultiDifferential.from_terms(self.k, self.g, {key: v * c for key, v in self.terms.items()},
                                            self.locations)

    def __add__(self, other: "MultiDifferential") -> "MultiDifferential":
        if self.k != other.k:
            raise ValueError("arity mismatch")
        out = defaultdict(_zero, self.terms)
        for key, c in other.terms.items():
            out[key] = out[key] + c
        return MultiDifferential.from_terms(self.k, self.g, out, self.locations or other.locations)

    def __sub__(self, other: "MultiDifferential") -> "MultiDifferential":
        return self + other.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, MultiDifferential):
            return NotImplemented
        return (self.k == other.k and self.bergmann == other.bergmann
                and dict(self.terms) == dict(other.terms))

    def __hash__(self):
        return hash((self.k, tuple(self.terms.items())))

    def permuted(self, perm: Sequence[int]) -> "MultiDifferential":
        """Slot j of the result is slot perm[j] of self."""
        return MultiDifferential.from_terms(
            self.k, self.g, {tuple(key[p] for p in perm): c for key, c in self.terms.items()}, self.locations)

    def symmetry_witness(self) -> dict:
        """Keys whose coefficient differs from a slot-permuted key (empty when symmetric)."""
        bad = {}
        for key, c in self.terms.items():
            for perm in itertools.permutations(range(self.k)):
                other = tuple(key[p] for p in perm)
                if self.terms.get(other, 0) != c:
                    bad[key] = (other, c, self.terms.get(other, 0))
                    break
        return bad

    def is_symmetric(self) -> bool:
        if self.bergmann:
            return True
        # transpositions of adjacent slots generate the symmetric group
        for j in range(self.k - 1):
            for key, c in self.terms.items():
                other = key[:j] + (key[j + 1], key[j]) + key[j + 2:]
                if self.terms.get(other, 0) != c:
                    return False
        return True

    def contract(self, slot: int, vector: Mapping) -> "MultiDifferential":
        """Pair one slot with a linear functional given on basis forms."""
        out = defaultdict(_zero)
        for key, c in self.terms.items():
            w = vector.get(key[slot], 0)
            if w == 0:
                continue
            rest = key[:slot] + key[slot + 1:]
            out[rest] = out[rest] + c * w
        return MultiDifferential.from_terms(self.k - 1, self.g, out, self.locations)

    def to_json_obj(self) -> list:
        return [
            {"slots": [{"branch": i, "order": d} for i, d in key], "coeff": _scalar_str(c)}
            for key, c in self.terms.items()
        ]

    @staticmethod
    def from_json_obj(k: int, g: int, obj: list, locations=()) -> "MultiDifferential":
        from .exactnum import Q

        terms = {}
        for entry in obj:
            key = tuple((int(s["branch"]), int(s["order"])) for s in entry["slots"])
            terms[key] = _parse_scalar(entry["coeff"])
        return MultiDifferential.from_terms(k, g, terms, locations)

    def to_text(self, var: str = "z") -> str:
        if self.bergmann:
            return f"d{var}_1 d{var}_2/({var}_1 - {var}_2)^2"
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.terms.items():
            factors = []
            for slot, (i, d) in enumerate(key, start=1):
                a = self.locations[i] if self.locations else f"a{i}"
                shift = _shift_text(var, slot, a)
                factors.append(f"d{var}_{slot}/{shift}^{d}")
            parts.append(f"({_scalar_str(c)}) " + " ".join(factors))
        return "\n+ ".join(parts)

    def __repr__(self):
        return f"MultiDifferential(k={self.k}, g={self.g}, terms={len(self.terms)})"


def _shift_text(var, slot, a):
    av = value_part(a) if not isinstance(a, str) else a
    if isinstance(av, str):
        return f"({var}_{slot} - {av})"
    if av == 0 and not isinstance(a, Dual):
        return f"{var}_{slot}"
    return f"({var}_{slot} - {_scalar_str(a)})"


def _scalar_str(c) -> str:
    if isinstance(c, Dual):
        return f"{qstr(c.value)}+{qstr(c.deriv)}eps"
    return qstr(c)


def _parse_scalar(s: str):
    from .exactnum import Q

    if "eps" in s:
        body = s[: -len("eps")]
        # split at the '+' separating value and derivative (skip a leading sign)
        cut = body.index("+", 1)
        return Dual(Q(body[:cut]), Q(body[cut + 1:]))
    return Q(s)


def bergmann(locations=()) -> MultiDifferential:
    return MultiDifferential(2, 0, {}, tuple(locations), bergmann=True)


# ------------------------------------------------------------ local kernel


def residue_of_product(a: LaurentSeries, b: LaurentSeries):
    """Coefficient of t^-1 in a*b without forming the whole product."""
    if a.is_zero() and a.prec == INF or b.is_zero() and b.prec == INF:
        return mpq(0)
    if a.prec != INF and not b.is_zero() and a.prec <= -1 - b.val:
        raise TruncationError("first factor truncated too early for the residue")
    if b.prec != INF and not a.is_zero() and b.prec <= -1 - a.val:
        raise TruncationError("second factor truncated too early for the residue")
    if a.is_zero() or b.is_zero():
        if (a.is_zero() and a.prec + (b.val if not b.is_zero() else b.prec) <= -1) or \
                (b.is_zero() and b.prec + (a.val if not a.is_zero() else a.prec) <= -1):
            raise TruncationError("zero factor with insufficient truncation")
        return mpq(0)
    total = mpq(0)
    lo = max(a.val, -1 - (b.val + len(b.coeffs) - 1))
    hi = min(a.val + len(a.coeffs) - 1, -1 - b.val)
    for n in range(lo, hi + 1):
        total = total + a.coeffs[n - a.val] * b.coeffs[-1 - n - b.val]
    return total


class LocalKernel:
    """Residue coefficients of the recursion kernel at one branch point.

    Basis elements on the q side are pairs (j, e): the function
    (q - a_j)^-e. For j equal to this branch point e may be <= 0, which
    encodes the Taylor monomials (q - a_i)^m produced by expanding B(q, p).
    """

    def __init__(self, curve: SpectralCurve, index: int, *, recheck: bool = True):
        self.curve = curve
        self.index = index
        self.a = curve.branch_locations[index]
        self.locations = curve.branch_locations
        self.recheck = recheck
        self._R: dict = {}
        self._RBB: dict = {}
        self._series: dict = {}

    # effective pole order at this branch point (0 for regular factors)
    def effective_order(self, b: Index) -> int:
        j, e = b
        return e if j == self.index else 0

    def bp(self, prec: int) -> BranchPoint:
        return self.curve.local(self.index, prec)

    def _level(self, need: int) -> int:
        n = 16
        while n < need:
            n += 8
        return n

    def kernel_series(self, d: int, prec: int) -> LaurentSeries:
        key = ("K", d, prec)
        if key not in self._series:
            bp = self.bp(prec)
            s = bp.involution
            t = LaurentSeries.monomial(1, mpq(1))
            num = s ** (d - 1) - t ** (d - 1)
            self._series[key] = (num / bp.omega).scale(mpq(1, 2))
        return self._series[key]

    def q_series(self, b: Index, prec: int) -> LaurentSeries:
        j, e = b
        if j == self.index:
            return LaurentSeries.monomial(-e, mpq(1))
        key = ("q", b, prec)
        if key not in self._series:
            base = LaurentSeries.exact((self.a - self.locations[j], mpq(1)))
            self._series[key] = base.inverse(prec=prec) ** e if e > 0 else base ** (-e)
        return self._series[key]

    def qbar_series(self, b: Index, prec: int) -> LaurentSeries:
        key = ("qb", b, prec)
        if key not in self._series:
            bp = self.bp(prec)
            j, e = b
            s = bp.involution
            if j == self.index:
                base = s
            else:
                base = s + (self.a - self.locations[j])
            f = base.inverse() ** e if e > 0 else base ** (-e)
            self._series[key] = f * bp.involution_derivative
        return self._series[key]

    def _needed_prec(self, d: int, b1: Index, b2: Index) -> int:
        return max(self.effective_order(b1) + self.effective_order(b2) + 3 - d, 1) + 2

    def _R_at(self, d: int, b1: Index, b2: Index, prec: int):
        k = self.kernel_series(d, prec)
        left = k * self.q_series(b1, prec) if b1[0] != self.index else k.shift(-b1[1])
        return residue_of_product(left, self.qbar_series(b2, prec))

    def R(self, d: int, b1: Index, b2: Index):
        key = (d, b1, b2)
        hit = self._R.get(key)
        if hit is not None:
            return hit
        need = self._needed_prec(d, b1, b2)
        prec = self._level(need)
        while True:
            try:
                val = self._R_at(d, b1, b2, prec)
                break
            except TruncationError:
                prec += 8
                if prec > 400:
                    raise
        if self.recheck:
            again = self._R_at(d, b1, b2, self._level(prec + 4))
            if again != val:
                raise RecursionError(f"kernel residue unstable under truncation change at {key}")
        self._R[key] = val
        return val

    def R_bergmann(self, d: int):
        """Res K_d(t) B(q, qbar) with B(q, qbar) = s'/(t - s)^2."""
        if d not in self._RBB:
            def at(prec):
                bp = self.bp(prec)
                t = LaurentSeries.monomial(1, mpq(1))
                diag = bp.involution_derivative * (t - bp.involution).inverse() ** 2
                return residue_of_product(self.kernel_series(d, prec), diag)

            val = at(16)
            if self.recheck and at(24) != val:
                raise RecursionError("diagonal kernel residue unstable under truncation change")
            self._RBB[d] = val
        return self._RBB[d]

    def max_kernel_order(self, b1: Index, b2: Index) -> int:
        return 2 + self.effective_order(b1) + self.effective_order(b2)


def bergmann_local_expansion(index: int, max_order: int) -> list[tuple[Index, Index, int]]:
    """B(q, p) for q = a_i + t: sum_m (m+1) t^m dp/(p - a_i)^(m+2).

    Returned as (q-side element, p-side pole form, coefficient) triples for
    m = 0..max_order.
    """
    return [((index, -m), (index, m + 2), m + 1) for m in range(max_order + 1)]


def recursion_kernel(curve: SpectralCurve, index: int, max_d: int, prec: int = 16) -> dict:
    """{d: K_d(t)} so that dE_q(p)/omega(q) = sum_d K_d(t) dp/(p - a_i)^d."""
    lk = LocalKernel(curve, index)
    return {d: lk.kernel_series(d, prec) for d in range(2, max_d + 1)}


# ------------------------------------------------------------ recursion


def _q_side(W: MultiDifferential, slot: int, kern: LocalKernel, bergmann_depth: int):
    """Group the terms of W by the basis element in the given slot.

    Returns {b: [(rest_key, coeff)]} with rest_key the remaining slots in order.
    """
    if W.bergmann:
        return {b: [((p,), c)] for b, p, c in bergmann_local_expansion(kern.index, bergmann_depth)}
    groups = defaultdict(list)
    for key, c in W.terms.items():
        groups[key[slot]].append((key[:slot] + key[slot + 1:], c))
    return groups


def _max_effective(groups, kern: LocalKernel) -> int:
    return max((kern.effective_order(b) for b in groups), default=0)


def _merge(J: tuple, k: int, r1: tuple, r2: tuple) -> tuple:
    out = [None] * k
    it1, it2 = iter(r1), iter(r2)
    jset = set(J)
    for pos in range(k):
        out[pos] = next(it1) if pos in jset else next(it2)
    return tuple(out)


def contract_with_kernel(kern: LocalKernel, pairs: Mapping, diagonal: Mapping | None = None) -> dict:
    """Sum_d R[d; b1, b2] * C[b1, b2][rest] into {((i, d),) + rest: coeff}."""
    out = defaultdict(_zero)
    i = kern.index
    for (b1, b2), rows in pairs.items():
        dmax = kern.max_kernel_order(b1, b2)
        if dmax < 2:
            continue
        live = [(rest, c) for rest, c in rows.items() if c != 0]
        if not live:
            continue
        for d in range(2, dmax + 1):
            r = kern.R(d, b1, b2)
            if r == 0:
                continue
            head = ((i, d),)
            for rest, c in live:
                key = head + rest
                out[key] = out[key] + r * c
    if diagonal:
        for d in range(2, 5):
            r = kern.R_bergmann(d)
            if r == 0:
                continue
            for rest, c in diagonal.items():
                key = ((i, d),) + rest
                out[key] = out[key] + r * c
    return out


class CorrelatorTable:
    """Memoized W_k^(g) and F^(g) for one curve."""

    def __init__(self, curve: SpectralCurve, *, recheck: bool = True, check_bounds: bool = True):
        self.curve = curve
        self.locations = curve.branch_locations
        self.ring = curve.ring
        self.kernels = [LocalKernel(curve, i, recheck=recheck) for i in range(len(self.locations))]
        self.check_bounds = check_bounds
        self._W: dict = {}
        self._F: dict = {}

    def get(self, k: int, g: int) -> MultiDifferential | None:
        """W_k^(g), or None when it vanishes by definition."""
        if g < 0 or k < 1:
            return None
        if (k, g) == (1, 0):
            return None
        if (k, g) == (2, 0):
            return bergmann(self.locations)
        key = (self.ring, k, g)
        if key not in self._W:
            self._W[key] = self._compute(k, g)
        return self._W[key]

    def W(self, k: int, g: int) -> MultiDifferential:
        w = self.get(k, g)
        return w if w is not None else MultiDifferential.zero(k, g, self.locations)

    def _compute(self, k_total: int, g: int) -> MultiDifferential:
        # fill lower levels first (triangular order in 2g + k)
        k = k_total - 1
        out = defaultdict(_zero)
        for kern in self.kernels:
            pairs = defaultdict(lambda: defaultdict(_zero))
            diagonal = defaultdict(_zero)
            positions = range(k)
            for m in range(g + 1):
                for size in range(k + 1):
                    for J in itertools.combinations(positions, size):
                        if (size, m) == (0, 0) or (k - size, g - m) == (0, 0):
                            continue
                        W1 = self.get(size + 1, m)
                        W2 = self.get(k - size + 1, g - m)
                        if W1 is None or W2 is None:
                            continue
                        if W1.bergmann and W2.bergmann:
                            G1 = _q_side(W1, 0, kern, 0)
                            G2 = _q_side(W2, 0, kern, 0)
                        elif W1.bergmann:
                            G2 = _q_side(W2, 0, kern, 0)
                            G1 = _q_side(W1, 0, kern, max(_max_effective(G2, kern), 0))
                        elif W2.bergmann:
                            G1 = _q_side(W1, 0, kern, 0)
                            G2 = _q_side(W2, 0, kern, max(_max_effective(G1, kern), 0))
                        else:
                            G1 = _q_side(W1, 0, kern, 0)
                            G2 = _q_side(W2, 0, kern, 0)
                        comp = tuple(p for p in positions if p not in J)
                        for b1, rows1 in G1.items():
                            E1 = kern.effective_order(b1)
                            for b2, rows2 in G2.items():
                                if E1 + kern.effective_order(b2) < 0:
                                    continue
                                dest = pairs[(b1, b2)]
                                for r1, c1 in rows1:
                                    for r2, c2 in rows2:
                                        key = _merge(J, k, r1, r2) if k else ()
                                        dest[key] = dest[key] + c1 * c2
            if g >= 1:
                inner = self.get(k + 2, g - 1)
                if inner is not None and inner.bergmann:
                    diagonal[()] = mpq(1)
                elif inner is not None:
                    for key, c in inner.terms.items():
                        dest = pairs[(key[0], key[1])]
                        dest[key[2:]] = dest[key[2:]] + c
            for key, c in contract_with_kernel(kern, pairs, diagonal).items():
                out[key] = out[key] + c
        W = MultiDifferential.from_terms(k_total, g, out, self.locations)
        if self.check_bounds:
            bound = pole_order_bound(k_total, g)
            if W.max_pole_order() > bound:
                raise RecursionError(
                    f"W_{k_total}^({g}) has a pole of order {W.max_pole_order()} > {bound}")
        return W

    # free energies
    def F(self, g: int, phi_shift: Mapping | None = None):
        if g < 2:
            raise UnsupportedRegimeError("F^(g) by the residue formula needs g >= 2; "
                                         "use compute_F1_derivative or compute_F0")
        if phi_shift is None and g in self._F:
            return self._F[g]
        W1 = self.W(1, g)
        total = mpq(0)
        for (key, c) in W1.terms.items():
            (i, e), = key
            phi = self.curve.local(i, max(e + 2, 16)).phi
            val = phi[e - 1]
            if e == 1 and phi_shift:
                val = val + phi_shift.get(i, 0)
            total = total + c * val
        # sign fixed so that the pairing matches the tabulated free energies
        F = total / (2 * g - 2)
        if phi_shift is None:
            self._F[g] = F
        return F


def compute_W(table: CorrelatorTable, k: int, g: int) -> MultiDifferential:
    if k < 1 or g < 0:
        raise ValueError(f"invalid (k, g) = ({k}, {g})")
    return table.W(k, g)


def compute_W3_closed(curve: SpectralCurve) -> MultiDifferential:
    """W_3^(0) = sum_i Res B(q,p1)B(q,p2)B(q,p3)/(dx(q) dy(q))."""
    out = defaultdict(_zero)
    locs = curve.branch_locations
    for i in range(len(locs)):
        bp = curve.local(i, 16)
        dens = (bp.dx_series * bp.y_series.derivative()).inverse()
        # B(q, p) = sum_m (m+1) t^m phi_{m+2}(p); keep m up to the depth with a residue
        depth = max(-1 - dens.val, 0)
        for ms in itertools.product(range(depth + 1), repeat=3):
            coef = mpq(1)
            for m in ms:
                coef *= m + 1
            r = dens[-1 - sum(ms)]
            if r == 0:
                continue
            key = tuple((i, m + 2) for m in ms)
            out[key] = out[key] + coef * r
    return MultiDifferential.from_terms(3, 0, out, locs)


def compute_F(table: CorrelatorTable, g: int):
    return table.F(g)


def _residue_diag_over_dx(bp: BranchPoint):
    t = LaurentSeries.monomial(1, mpq(1))
    integrand = bp.involution_derivative * (t - bp.involution).inverse() ** 2 * bp.dx_series.inverse()
    return integrand[-1]


def compute_F1_derivative(curve: SpectralCurve) -> mpq:
    """eps-part of F^(1) = -1/2 ln tau_Bx - 1/24 ln prod_i y'(a_i) for a dual curve.

    y'(a_i) is the derivative of y in the local coordinate sqrt(x - x(a_i)).
    """
    if curve.ring != "dual":
        raise UnsupportedRegimeError("F^(1) is available only as a derivative; the curve needs a dual parameter")
    total = mpq(0)
    for i in range(len(curve.branch_locations)):
        bp = curve.local(i, 16)
        dxa = deriv_part(bp.x_series[0])
        if dxa != 0:
            res = value_part(_residue_diag_over_dx(bp))
            total -= mpq(1, 2) * dxa * res
        total -= mpq(1, 24) * (log_derivative(bp.y_series[1]) - mpq(1, 2) * log_derivative(bp.x_series[2]))
    return total


def compute_F0(curve: SpectralCurve):
    """F^(0) = -1/2 sum_alpha Res_alpha V_alpha y dx, valid when every temperature vanishes."""
    poles = analyze_poles(curve)
    for p in poles:
        if p.temperature != 0:
            raise UnsupportedRegimeError(
                f"F^(0) needs all temperatures zero; pole at {p.label()} has t = {p.temperature}")
    total = mpq(0)
    for p in poles:
        Vz = _poly_in_series(p.times, p.zeta)
        total = total + (Vz * p.ydx)[-1]
    return -total / 2


def _poly_in_series(times: Sequence, zeta: LaurentSeries) -> LaurentSeries:
    out = LaurentSeries.zero(INF)
    power = LaurentSeries.monomial(0, mpq(1))
    for t in times:
        power = power * zeta
        if t != 0:
            out = out + power.scale(t)
    return out


# ------------------------------------------------------------ identities


def phi_vector(curve: SpectralCurve, max_order: int) -> dict:
    """{(j, e): Res_{a_j} Phi dz/(z - a_j)^e} with Phi fixed to vanish at each branch point."""
    vec = {}
    for j in range(len(curve.branch_locations)):
        phi = curve.local(j, max(max_order + 2, 16)).phi
        for e in range(1, max_order + 1):
            vec[(j, e)] = phi[e - 1]
    return vec


def dilaton_check(table: CorrelatorTable, k: int, g: int, samples: Sequence = (mpq(7, 3), mpq(-5, 2), mpq(11, 4))):
    """Res Phi(p_{k+1}) W_{k+1}^(g)(p_K, p_{k+1}) - (2g+k-2) W_k^(g); returns (ok, witness)."""
    if k < 1:
        raise ValueError("k >= 1 required")
    if (k, g) == (1, 0):
        # the only contribution is the residue at p_2 -> p_1 of Phi(p_2) B(p_1, p_2)
        curve = table.curve
        ydx = curve.y * curve.x.derivative()
        bad = {}
        for p in samples:
            phi_local = (curve.y.series(p, 4) * curve.x.series(p, 5).derivative()).integral()
            lhs = (phi_local * LaurentSeries.monomial(-2, mpq(1)))[-1]
            if lhs != ydx(p):
                bad[p] = (lhs, ydx(p))
        return not bad, bad
    W = table.W(k + 1, g)
    vec = phi_vector(table.curve, max(W.max_pole_order(), 1))
    lhs = W.contract(k, vec)
    rhs = table.W(k, g).scale(2 * g + k - 2) if not (k == 2 and g == 0) else MultiDifferential.zero(2, 0)
    if k == 2 and g == 0:
        diff = lhs
    else:
        diff = lhs - rhs
    return diff.is_zero(), dict(diff.terms)


def residue_check(table: CorrelatorTable, k: int, g: int,
                  samples: Sequence = ((mpq(7, 3), mpq(-5, 2), mpq(11, 4), mpq(-13, 5), mpq(17, 6), mpq(19, 7)),)):
    """Residue identities of W_k^(g) in its first slot.

    Per branch point Res W = 0 and Res x W = 0 hold exactly on the tensor.
    For m = 0, 1 the sum over branch points of Res x^m y W_{k}(p, p_K) equals
    -sum_j d/dp_j [x(p_j)^m W_{k-1}(p_K) / x'(p_j)], which vanishes for k = 1;
    this is checked by exact evaluation at the sample points. The y-identities
    are skipped for W_1^(1), where the quadratic loop term is singular.

    Returns (ok, witness)."""
    W = table.W(k, g)
    curve = table.curve
    n = len(curve.branch_locations)
    top = max(W.max_pole_order(), 1)
    xs = [curve.local(i, top + 2).x_series for i in range(n)]
    ys = [curve.local(i, top + 2).y_series for i in range(n)]
    witness = {}
    for slot in range(k):
        res = defaultdict(_zero)
        xres = defaultdict(_zero)
        for key, c in W.terms.items():
            i, e = key[slot]
            rest = key[:slot] + key[slot + 1:]
            if e == 1:
                res[(i, rest)] += c
            xres[(i, rest)] += c * xs[i][e - 1]
        for name, rows in (("res", res), ("x", xres)):
            for where, v in rows.items():
                if v != 0:
                    witness[(slot, name, where)] = v
    if (k, g) == (1, 1):
        return not witness, witness
    for m in (0, 1):
        weights = {}
        for i in range(n):
            wy = ys[i] * xs[i] if m else ys[i]
            for e in range(1, top + 1):
                weights[(i, e)] = wy[e - 1]
        lhs_tensor = W.contract(0, weights)
        others = table.get(k - 1, g) if k > 1 else None
        for pts in samples:
            pts = tuple(pts[: k - 1])
            lhs = lhs_tensor.evaluate(pts) if k > 1 else lhs_tensor[()]
            rhs = mpq(0)
            if others is not None:
                for j in range(k - 1):
                    p = pts[j]
                    f = curve.x(p) ** m / curve.x.derivative()(p)
                    df = _derivative_at(lambda z: curve.x(z) ** m / curve.x.derivative()(z), curve, p, m)
                    rhs += df * others.evaluate(pts) + f * others.evaluate_partial(pts, j)
                rhs = -rhs
            if lhs != rhs:
                witness[("y" if m == 0 else "xy", pts)] = (lhs, rhs)
    return not witness, witness


def _derivative_at(_f, curve: SpectralCurve, p, m: int):
    """d/dp of x(p)^m / x'(p)."""
    x, dx = curve.x, curve.x.derivative()
    d2x = dx.derivative()
    if m == 0:
        return -d2x(p) / dx(p) ** 2
    return 1 - x(p) * d2x(p) / dx(p) ** 2


def _sigma_pullback(W: MultiDifferential, slot: int, curve: SpectralCurve) -> MultiDifferential:
    """Pull back one slot by the global involution z -> c - z of a quadratic x."""
    c = curve.global_involution
    locs = curve.branch_locations
    index_of = {value_part(a): i for i, a in enumerate(locs)}
    out = {}
    for key, v in W.terms.items():
        i, e = key[slot]
        image = value_part(c - locs[i])
        if image not in index_of:
            raise CurveError("global involution does not permute the branch points")
        j = index_of[image]
        # dz'/(z' - a)^e with z' = c - z equals (-1)^(e+1) dz/(z - (c - a))^e
        sign = -1 if e % 2 == 0 else 1
        new = key[:slot] + ((j, e),) + key[slot + 1:]
        out[new] = out.get(new, 0) + sign * v
    return MultiDifferential.from_terms(W.k, W.g, out, W.locations)


def sheet_sum_check(table: CorrelatorTable, k: int, g: int):
    """W(p, ...) + W(sigma p, ...) = 0 in every slot (both divided by the invariant dx)."""
    if (k, g) in ((2, 0), (1, 0)):
        raise ValueError("the sheet sum has a source term for the Bergmann kernel")
    W = table.W(k, g)
    witness = {}
    for slot in range(k):
        total = W + _sigma_pullback(W, slot, table.curve)
        if not total.is_zero():
            witness[slot] = dict(total.terms)
    return not witness, witness


def _slot_series(W: MultiDifferential, slot: int, i: int, curve: SpectralCurve, at_sigma: bool, prec: int):
    """W with one slot evaluated at p = a_i + t (or at its global image), as
    {rest: LaurentSeries in t} including the Jacobian of the image."""
    locs = curve.branch_locations
    a = locs[i]
    out = defaultdict(lambda: LaurentSeries.zero(prec))
    for key, c in W.terms.items():
        j, e = key[slot]
        rest = key[:slot] + key[slot + 1:]
        if at_sigma:
            # p' = c - p = c - a - t; dp' = -dt
            base = LaurentSeries.exact((curve.global_involution - a - locs[j], mpq(-1)))
            jac = mpq(-1)
        else:
            base = LaurentSeries.exact((a - locs[j], mpq(1)))
            jac = mpq(1)
        if base[0] == 0:
            f = base.inverse() ** e
        else:
            f = base.inverse(prec=prec) ** e
        out[rest] = out[rest] + f.truncate(prec).scale(c * jac)
    return out


def _bergmann_slot_series(i: int, curve: SpectralCurve, at_sigma: bool, depth: int, prec: int):
    """B(p, p_l) for p = a_i + t (or its image) as {((i, m+2),): series}."""
    out = {}
    for m in range(depth + 1):
        sign = (-1) ** m * -1 if at_sigma else 1
        # B(a + s, p) = sum (m+1) s^m phi_{m+2}(p); at the image s = -t and ds = -dt
        out[((i, m + 2),)] = LaurentSeries.monomial(m, mpq((m + 1) * sign)).truncate(prec)
    return out


def Pk_regularity_check(table: CorrelatorTable, k: int, g: int):
    """Principal part of the sheet-symmetric P_k^(g)(x(p), p_K) at each branch point."""
    if (k, g) == (0, 1):
        raise ValueError("P_k^(g) is not defined for (k, g) = (0, 1)")
    curve = table.curve
    curve.global_involution
    locs = curve.branch_locations
    witness = {}
    positions = tuple(range(k))
    depth = 2 * (6 * g + 2 * k + 4)
    prec = 2
    for i in range(len(locs)):
        a = locs[i]
        total = defaultdict(lambda: LaurentSeries.zero(prec))
        bp = curve.local(i, depth + 8)
        work = depth + 4
        for at_sigma in (False, True):
            if at_sigma:
                sig = LaurentSeries.exact((mpq(0), mpq(-1)))
                ysheet = bp.y_series.compose(sig) if False else _compose_neg(curve.y, curve.global_involution - a, work)
            else:
                ysheet = curve.y.series(a, work)
            dxp = bp.dx_series.truncate(work)
            # -2 y(p^i) dx(p) W_{k+1}(p^i, p_K)
            Wk1 = table.get(k + 1, g)
            if Wk1 is not None:
                for rest, ser in _slot_series(Wk1, 0, i, curve, at_sigma, work).items():
                    total[rest] = total[rest] + (ysheet * dxp * ser).scale(-2)
            # W_{k+2}^(g-1)(p^i, p^i, p_K)
            inner = table.get(k + 2, g - 1)
            if inner is not None and not inner.bergmann:
                for rest, ser in _double_slot_series(inner, i, curve, at_sigma, work).items():
                    total[rest] = total[rest] + ser
            # products over splits
            for m in range(g + 1):
                for size in range(k + 1):
                    for J in itertools.combinations(positions, size):
                        if (size, m) == (0, 0) or (k - size, g - m) == (0, 0):
                            continue
                        W1 = table.get(size + 1, m)
                        W2 = table.get(k - size + 1, g - m)
                        if W1 is None or W2 is None:
                            continue
                        S1 = (_bergmann_slot_series(i, curve, at_sigma, work, work) if W1.bergmann
                              else _slot_series(W1, 0, i, curve, at_sigma, work))
                        S2 = (_bergmann_slot_series(i, curve, at_sigma, work, work) if W2.bergmann
                              else _slot_series(W2, 0, i, curve, at_sigma, work))
                        for r1, s1 in S1.items():
                            for r2, s2 in S2.items():
                                key = _merge(J, k, r1, r2) if k else ()
                                total[key] = total[key] + s1 * s2
        dx2 = (bp.dx_series * bp.dx_series).truncate(work)
        for rest, ser in total.items():
            P = ser.div(dx2, 0) if not ser.is_zero() else ser
            principal = [(n, c) for n, c in P.terms() if n < 0]
            if principal:
                witness[(i, rest)] = principal
    return not witness, witness


def _compose_neg(y, shift, prec):
    """Series of y(shift - t) in t."""
    s = y.series(shift, prec)
    return LaurentSeries([c * (-1) ** (s.val + n) for n, c in enumerate(s.coeffs)], s.val, s.prec)


def _double_slot_series(W: MultiDifferential, i: int, curve: SpectralCurve, at_sigma: bool, prec: int):
    first = defaultdict(lambda: LaurentSeries.zero(prec))
    one = _slot_series(W, 0, i, curve, at_sigma, prec)
    out = defaultdict(lambda: LaurentSeries.zero(prec))
    # evaluate slot 0 then slot 1 (now slot 0 of the remainder) at the same point
    for rest, ser in one.items():
        W_rest = MultiDifferential.from_terms(W.k - 1, W.g, {rest: mpq(1)}, W.locations)
        for rest2, ser2 in _slot_series(W_rest, 0, i, curve, at_sigma, prec).items():
            out[rest2] = out[rest2] + ser * ser2
    return out


def check_symmetry(table: CorrelatorTable, k: int, g: int) -> bool:
    return table.W(k, g).is_symmetric()


def check_phi_constant_independence(table: CorrelatorTable, g: int, shifts: Iterable) -> bool:
    base = table.F(g)
    n = len(table.locations)
    for s in shifts:
        if table.F(g, phi_shift={i: s for i in range(n)}) != base:
            return False
    return True
