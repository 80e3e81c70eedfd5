"""Named identity suites shared by the CLI check command and the tests."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from gmpy2 import mpq

from .curve import CurveError, RationalFunction, SpectralCurve
from .exactnum import Q
from .graphs import add_leg_map_check, count_graphs, weight_sum
from .oracle import branch_points, eval_W_direct
from .recursion import (CorrelatorTable, check_symmetry, dilaton_check, residue_check)
from .specfile import load_preset
from .variation import SymplecticTransform, apply_transform, homogeneity_check

SUITES = ("symmetry", "dilaton", "residues", "symplectic", "homogeneity", "diagrams", "oracle")
DEFAULT_CURVES = ("airy", "pure-gravity", "kontsevich-1111")


@dataclass
class CheckResult:
    suite: str
    label: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        tail = f"  {self.detail}" if self.detail and not self.ok else ""
        return f"{status}  {self.suite}: {self.label}{tail}"


@dataclass
class SuiteContext:
    curves: dict  # name -> SpectralCurve
    max_weight: int = 6
    seed: int = 0
    tuples: int = 10
    tables: dict = field(default_factory=dict)

    def table(self, name: str) -> CorrelatorTable:
        if name not in self.tables:
            self.tables[name] = CorrelatorTable(self.curves[name])
        return self.tables[name]


def cells(max_weight: int, *, stable_only: bool = True):
    """(k, g) with k >= 1 and 2g + k <= max_weight, skipping W_1^(0) and W_2^(0)."""
    for g in range(max_weight // 2 + 1):
        for k in range(1, max_weight - 2 * g + 1):
            if stable_only and (k, g) in ((1, 0), (2, 0)):
                continue
            yield k, g


def _short(witness) -> str:
    text = repr(witness)
    return text if len(text) < 200 else text[:197] + "..."


def suite_symmetry(ctx: SuiteContext):
    for name in ctx.curves:
        for k, g in cells(ctx.max_weight):
            if k < 2:
                continue
            yield CheckResult("symmetry", f"{name} W_{k}^({g})", check_symmetry(ctx.table(name), k, g))


def suite_dilaton(ctx: SuiteContext):
    for name in ctx.curves:
        for k, g in cells(ctx.max_weight, stable_only=False):
            ok, w = dilaton_check(ctx.table(name), k, g)
            yield CheckResult("dilaton", f"{name} (k,g)=({k},{g})", ok, _short(w))


def suite_residues(ctx: SuiteContext):
    for name in ctx.curves:
        for k, g in cells(ctx.max_weight):
            ok, w = residue_check(ctx.table(name), k, g)
            yield CheckResult("residues", f"{name} W_{k}^({g})", ok, _short(w))


def symplectic_transforms() -> list[tuple[str, SymplecticTransform]]:
    R = [RationalFunction.of([Q(1), Q(-2)]),
         RationalFunction.of([mpq(3, 2), Q(0), Q(5)]),
         RationalFunction.of([Q(0), mpq(-1, 3), Q(2), mpq(7, 4)])]
    out = [(f"y -> y + R{i + 1}(x)", SymplecticTransform("add_rational_of_x", r)) for i, r in enumerate(R)]
    out.append(("scale c = 2/3", SymplecticTransform("scale", mpq(2, 3))))
    out.append(("x -> -x", SymplecticTransform("negate_x")))
    out.append(("x <-> y", SymplecticTransform("swap_xy")))
    return out


def suite_symplectic(ctx: SuiteContext):
    """F^(2) under each transform; the swap is skipped where the exchanged x has irrational branch points."""
    curves = {n: c for n, c in ctx.curves.items() if n != "airy"}
    if "pure-gravity" not in curves:
        curves = {"pure-gravity": load_preset("pure-gravity"), **curves}
    for name, curve in curves.items():
        base = CorrelatorTable(curve).F(2)
        for label, T in symplectic_transforms():
            try:
                moved_curve = apply_transform(curve, T)
            except CurveError:
                if T.kind == "swap_xy" and name != "pure-gravity":
                    continue
                raise
            moved = CorrelatorTable(moved_curve).F(2)
            yield CheckResult("symplectic", f"{name} F^(2) under {label}", moved == base, f"{moved} != {base}")


def suite_homogeneity(ctx: SuiteContext):
    for name, curve in ctx.curves.items():
        if name == "airy":
            continue
        ok, (lhs, rhs) = homogeneity_check(curve, 2)
        yield CheckResult("homogeneity", f"{name} g=2", ok, f"{lhs} != {rhs}")


def suite_diagrams(ctx: SuiteContext):
    for (k, g), n in {(0, 2): 5, (2, 0): 2}.items():
        c = count_graphs(k, g)
        yield CheckResult("diagrams", f"|G_{k + 1}^({g})| = {n}", c == n, f"got {c}")
    for k, g in ((0, 1), (0, 2), (1, 1), (2, 0)):
        rep = add_leg_map_check(k, g)
        yield CheckResult("diagrams", f"add-leg multiplicity 3g+2k-1 at (k,g)=({k},{g})", rep.ok, repr(rep))
    for name, curve in ctx.curves.items():
        if name == "airy":
            continue
        for k, g in cells(ctx.max_weight):
            leaves = k - 1
            total = weight_sum(curve, leaves, g)
            ok = (total - ctx.table(name).W(k, g)).is_zero()
            yield CheckResult("diagrams", f"{name} sum w(G) over G_{k}^({g}) = W_{k}^({g})", ok)


def random_points(curve: SpectralCurve, k: int, rng: random.Random) -> list[mpq]:
    avoid = set(branch_points(curve))
    pts: list[mpq] = []
    while len(pts) < k:
        z = mpq(rng.randint(-40, 40), rng.randint(1, 9))
        if z not in avoid and z not in pts:
            pts.append(z)
    return pts


def suite_oracle(ctx: SuiteContext):
    rng = random.Random(ctx.seed)
    for name, curve in ctx.curves.items():
        for k, g in cells(ctx.max_weight):
            W = ctx.table(name).W(k, g)
            bad = []
            for _ in range(ctx.tuples):
                pts = random_points(curve, k, rng)
                a, b = eval_W_direct(curve, k, g, pts), W.evaluate(pts)
                if a != b:
                    bad.append((pts, a, b))
            yield CheckResult("oracle", f"{name} W_{k}^({g}) at {ctx.tuples} point tuples", not bad, _short(bad[:1]))


RUNNERS: dict[str, Callable[[SuiteContext], object]] = {
    "symmetry": suite_symmetry,
    "dilaton": suite_dilaton,
    "residues": suite_residues,
    "symplectic": suite_symplectic,
    "homogeneity": suite_homogeneity,
    "diagrams": suite_diagrams,
    "oracle": suite_oracle,
}


def run_suites(names: Sequence[str], ctx: SuiteContext):
    for name in names:
        if name not in RUNNERS:
            raise ValueError(f"unknown suite {name!r}")
        yield from RUNNERS[name](ctx)
