"""Curve-spec documents: JSON descriptions of a rational parametrization.

    {"parameters": {"t3": "0"},
     "x": {"numerator": ["0", "0", "1"], "denominator": ["1"]},
     "y": {"numerator": ["0", "-1 + t3/2"]},
     "branch_points": ["0"],
     "dual": "t3"}

Coefficients are rational strings, parameter names, or small arithmetic
expressions (+ - * / and integer powers) over them. The parameter named by
"dual" carries an infinitesimal epsilon for exact first derivatives.
"""
from __future__ import annotations

import ast
import json
import re
from importlib import resources
from pathlib import Path

from .curve import CurveError, RationalFunction, SpectralCurve
from .exactnum import Dual, Polynomial, Q, qstr

RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class SpecError(ValueError):
    pass


def _eval_expr(text: str, env: dict):
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as e:
        raise SpecError(f"cannot parse coefficient {text!r}") from e

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Q(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise SpecError(f"unknown parameter {node.id!r} in {text!r}")
            return env[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = ev(node.left)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise SpecError(f"exponents must be integer literals in {text!r}")
                return a ** node.right.value
            b = ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if b == 0:
                    raise SpecError(f"division by zero in {text!r}")
                return a / b
        raise SpecError(f"unsupported syntax in coefficient {text!r}")

    return ev(tree)


def _coefficient(entry, env: dict):
    if isinstance(entry, int) and not isinstance(entry, bool):
        return Q(entry)
    if not isinstance(entry, str):
        raise SpecError(f"coefficient {entry!r} must be a string")
    s = entry.strip()
    if RATIONAL.match(s):
        if s.endswith("/0"):
            raise SpecError(f"zero denominator in {entry!r}")
        return Q(s)
    return _eval_expr(s, env)


def _poly(entries, env: dict, what: str) -> Polynomial:
    if not isinstance(entries, list) or not entries:
        raise SpecError(f"{what} must be a non-empty list of coefficients")
    return Polynomial(tuple(_coefficient(e, env) for e in entries))


def _rational_function(obj, env: dict, what: str) -> RationalFunction:
    if not isinstance(obj, dict) or "numerator" not in obj:
        raise SpecError(f"{what} needs a 'numerator' list")
    extra = set(obj) - {"numerator", "denominator"}
    if extra:
        raise SpecError(f"unknown keys in {what}: {sorted(extra)}")
    num = _poly(obj["numerator"], env, f"{what}.numerator")
    den = _poly(obj.get("denominator", ["1"]), env, f"{what}.denominator")
    if den.is_zero():
        raise SpecError(f"{what} has a zero denominator")
    return RationalFunction(num, den)


def curve_from_spec(spec: dict, *, dual: str | None = None, name: str = "") -> SpectralCurve:
    """Build and validate the curve; dual overrides the document's "dual" member."""
    if not isinstance(spec, dict):
        raise SpecError("a curve spec is a JSON object")
    extra = set(spec) - {"parameters", "x", "y", "branch_points", "dual", "name", "description"}
    if extra:
        raise SpecError(f"unknown keys in curve spec: {sorted(extra)}")
    params = spec.get("parameters", {})
    if not isinstance(params, dict):
        raise SpecError("'parameters' must be an object")
    env = {}
    for key, val in params.items():
        if not NAME.match(key):
            raise SpecError(f"bad parameter name {key!r}")
        if not isinstance(val, str) or not RATIONAL.match(val.strip()):
            raise SpecError(f"parameter {key} must be a rational string, got {val!r}")
        env[key] = Q(val.strip())
    dual = dual or spec.get("dual")
    if dual is not None:
        if dual not in env:
            raise SpecError(f"dual parameter {dual!r} is not among the parameters")
        env[dual] = Dual.variable(env[dual])
    for member in ("x", "y"):
        if member not in spec:
            raise SpecError(f"curve spec is missing '{member}'")
    x = _rational_function(spec["x"], env, "x")
    y = _rational_function(spec["y"], env, "y")
    hint = None
    if "branch_points" in spec:
        bps = spec["branch_points"]
        if not isinstance(bps, list) or not all(isinstance(b, str) and RATIONAL.match(b.strip()) for b in bps):
            raise SpecError("'branch_points' must be a list of rational strings")
        hint = tuple(Q(b.strip()) for b in bps)
    values = {k: v for k, v in env.items()}
    curve = SpectralCurve(x, y, values, hint, name or spec.get("name", ""))
    try:
        return curve.validate()
    except CurveError:
        raise
    except (ArithmeticError, ValueError) as e:
        raise CurveError(str(e)) from e


def curve_to_spec(curve: SpectralCurve) -> dict:
    """Numeric spec of a rational curve (parameters already substituted)."""
    if curve.ring == "dual":
        raise SpecError("dual curves have no numeric spec")

    def rf(r: RationalFunction) -> dict:
        return {"numerator": [qstr(c) for c in r.num.coeffs], "denominator": [qstr(c) for c in r.den.coeffs]}

    out = {"x": rf(curve.x), "y": rf(curve.y)}
    if curve.name:
        out = {"name": curve.name, **out}
    return out


def load_spec_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e.strerror}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: invalid JSON ({e})") from e


def preset_names() -> list[str]:
    root = resources.files("toprec") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset_spec(name: str) -> dict:
    root = resources.files("toprec") / "presets"
    f = root / f"{name}.json"
    if not f.is_file():
        raise SpecError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return json.loads(f.read_text())


def load_preset(name: str, *, dual: str | None = None) -> SpectralCurve:
    spec = load_preset_spec(name)
    return curve_from_spec(spec, dual=dual, name=spec.get("name", name))
