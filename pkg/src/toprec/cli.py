"""toprec command line: correlators, free energies, graphs, identity suites, oracle."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .curve import CurveError
from .exactnum import Q, TruncationError, qstr
from .graphs import GraphError, GraphWeigher, enumerate_graphs, weight_sum
from .oracle import OracleError, eval_W_direct
from .recursion import CorrelatorTable, MultiDifferential, RecursionError, UnsupportedRegimeError
from .specfile import SpecError, curve_from_spec, load_preset, load_spec_file, preset_names
from .suites import DEFAULT_CURVES, SUITES, SuiteContext, run_suites
from .variation import ModulusError, free_energy_derivative

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_CHECK = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def tensor_json(W: MultiDifferential) -> str:
    """Canonical JSON for a pole-basis tensor: entries sorted by slot key."""
    ordered = MultiDifferential.from_terms(W.k, W.g, dict(sorted(W.terms.items())), W.locations)
    return json.dumps(ordered.to_json_obj(), indent=2)


def parse_tensor_json(text: str, k: int, g: int) -> MultiDifferential:
    return MultiDifferential.from_json_obj(k, g, json.loads(text))


def _curve(args, dual: str | None = None):
    if args.curve and args.preset:
        raise UsageError("give either --curve or --preset, not both")
    if args.preset:
        return load_preset(args.preset, dual=dual)
    if args.curve:
        return curve_from_spec(load_spec_file(args.curve), dual=dual, name=args.curve)
    raise UsageError("a curve is required: --curve FILE or --preset NAME")


def _nonneg(args):
    if args.k < 0 or args.g < 0:
        raise UsageError("k and g must be non-negative")


# ------------------------------------------------------------ commands


def cmd_correlator(args) -> int:
    _nonneg(args)
    if args.k < 1:
        raise UsageError("W_k^(g) needs k >= 1")
    curve = _curve(args)
    if (args.k, args.g) == (2, 0):
        if args.format == "json":
            raise UsageError("W_2^(0) is the Bergmann kernel and has no pole-basis tensor")
        print("dz_1 dz_2/(z_1 - z_2)^2")
        return EXIT_OK
    table = CorrelatorTable(curve)
    if (args.k, args.g) == (1, 0):
        W = MultiDifferential.zero(1, 0, table.locations)
    else:
        W = table.W(args.k, args.g)
    if args.format == "json":
        print(tensor_json(W))
    else:
        print(_locations_text(table.locations))
        print(W.to_text())
    return EXIT_OK


def _locations_text(locations) -> str:
    return "branch points: " + ", ".join(f"a_{i} = {qstr(a)}" for i, a in enumerate(locations))


def cmd_free_energy(args) -> int:
    if args.g < 0:
        raise UsageError("g must be non-negative")
    if args.f1_derivative:
        curve = _curve(args, dual=args.f1_derivative)
        print(qstr(free_energy_derivative(curve, args.g)))
        return EXIT_OK
    curve = _curve(args)
    if curve.ring == "dual":
        print(qstr(free_energy_derivative(curve, args.g)))
        return EXIT_OK
    if args.g == 1:
        raise UnsupportedRegimeError("F^(1) is only available as a derivative: pass --f1-derivative PARAM")
    if args.g == 0:
        from .recursion import compute_F0

        print(qstr(compute_F0(curve)))
        return EXIT_OK
    print(qstr(CorrelatorTable(curve).F(args.g)))
    return EXIT_OK


def cmd_graphs(args) -> int:
    _nonneg(args)
    graphs = enumerate_graphs(args.k, args.g)
    if args.count:
        print(len(graphs))
        return EXIT_OK
    if args.list:
        print("\n\n".join(G.to_text() for G in graphs))
        return EXIT_OK
    curve = _curve(args)
    weigher = GraphWeigher(curve)
    total = weight_sum(curve, args.k, args.g)
    W = CorrelatorTable(curve).W(args.k + 1, args.g)
    matches = (total - W).is_zero()
    if args.format == "json":
        doc = {
            "graphs": [{"graph": G.to_text(), "weight": json.loads(tensor_json(weigher.weight(G)))} for G in graphs],
            "sum": json.loads(tensor_json(total)),
            "matches_recursion": matches,
        }
        print(json.dumps(doc, indent=2))
    else:
        for G in graphs:
            print(G.to_text())
            print("  w = " + weigher.weight(G).to_text())
        print(f"sum over {len(graphs)} graphs " + ("equals" if matches else "DIFFERS FROM") + f" W_{args.k + 1}^({args.g})")
    return EXIT_OK if matches else EXIT_CHECK


def cmd_check(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.preset or args.curve:
        curves = {}
        for p in args.preset or ():
            curves[p] = load_preset(p)
        for f in args.curve or ():
            curves[f] = curve_from_spec(load_spec_file(f), name=f)
    else:
        curves = {p: load_preset(p) for p in DEFAULT_CURVES}
    ctx = SuiteContext(curves, max_weight=args.max_weight, seed=args.seed, tuples=args.tuples)
    failures = 0
    total = 0
    t0 = time.time()
    for r in run_suites(names, ctx):
        total += 1
        failures += not r.ok
        print(r.line(), flush=True)
    print(f"{total - failures}/{total} checks passed in {time.time() - t0:.1f}s")
    return EXIT_OK if failures == 0 else EXIT_CHECK


def cmd_oracle(args) -> int:
    _nonneg(args)
    if args.k < 1:
        raise UsageError("W_k^(g) needs k >= 1")
    if len(args.points) != args.k:
        raise UsageError(f"need exactly {args.k} points, got {len(args.points)}")
    try:
        pts = [Q(p) for p in args.points]
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"points must be rational strings: {e}") from e
    curve = _curve(args)
    value = eval_W_direct(curve, args.k, args.g, pts)
    if args.compare:
        rec = CorrelatorTable(curve).W(args.k, args.g).evaluate(pts) if (args.k, args.g) != (2, 0) else None
        ok = rec is None or rec == value
        if args.format == "json":
            print(json.dumps({"points": [qstr(p) for p in pts], "oracle": qstr(value),
                              "recursion": qstr(rec) if rec is not None else None, "agree": ok}, indent=2))
        else:
            print(f"oracle {qstr(value)}  recursion {qstr(rec) if rec is not None else '-'}  "
                  + ("agree" if ok else "DISAGREE"))
        return EXIT_OK if ok else EXIT_CHECK
    if args.format == "json":
        print(json.dumps({"points": [qstr(p) for p in pts], "value": qstr(value)}, indent=2))
    else:
        print(qstr(value))
    return EXIT_OK


# ------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_curve_args(p, multiple: bool = False):
    if multiple:
        p.add_argument("--curve", action="append", metavar="FILE", help="curve-spec file (repeatable)")
        p.add_argument("--preset", action="append", metavar="NAME", help="shipped preset (repeatable)")
    else:
        p.add_argument("--curve", metavar="FILE", help="curve-spec JSON file")
        p.add_argument("--preset", metavar="NAME", help="shipped preset: " + ", ".join(preset_names()))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="toprec", description="Exact topological recursion on genus-0 curves.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("correlator", help="W_k^(g) as a pole-basis tensor")
    _add_curve_args(p)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-g", type=int, required=True)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_correlator)

    p = sub.add_parser("free-energy", help="F^(g), or its derivative along a parameter")
    _add_curve_args(p)
    p.add_argument("-g", type=int, required=True)
    p.add_argument("--f1-derivative", metavar="PARAM",
                   help="differentiate along a curve parameter (required for g = 1)")
    p.set_defaults(func=cmd_free_energy)

    p = sub.add_parser("graphs", help="diagrams of G_{k+1}^(g) with k leaves")
    _add_curve_args(p)
    p.add_argument("-k", type=int, required=True, help="number of leaves")
    p.add_argument("-g", type=int, required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--count", action="store_true")
    mode.add_argument("--list", action="store_true")
    mode.add_argument("--weights", action="store_true")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_graphs)

    p = sub.add_parser("check", help="run identity suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--max-weight", type=int, default=5, help="bound on 2g + k")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tuples", type=int, default=10, help="random point tuples per cell (oracle suite)")
    _add_curve_args(p, multiple=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="W_k^(g) at points by direct nested residues")
    _add_curve_args(p)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-g", type=int, required=True)
    p.add_argument("--points", nargs="*", default=[], metavar="Z")
    p.add_argument("--compare", action="store_true", help="also evaluate the recursion and compare")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SpecError, CurveError, GraphError, UnsupportedRegimeError, ModulusError) as e:
        print(f"toprec: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (RecursionError, OracleError, TruncationError, ArithmeticError) as e:
        print(f"toprec: computation failed: {e}", file=sys.stderr)
        return EXIT_COMPUTE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); keep the interpreter's final flush quiet
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
