"""Regenerate the curve-spec presets shipped in src/toprec/presets."""
import json
from pathlib import Path

from toprec.exactnum import Q, qstr
from toprec.models import PQModel, build_airy, build_pq, build_pq_from_polynomials, ising_polynomials, quartic_onecut_curve
from toprec.specfile import curve_from_spec, curve_to_spec
from toprec.variation import SymplecticTransform, apply_transform

OUT = Path(__file__).resolve().parents[1] / "src" / "toprec" / "presets"


def kontsevich_spec(name, times, top=9):
    params = {f"t{k}": qstr(Q(times.get(k, 0))) for k in range(1, top + 1)}
    y = ["t2/2", "-1 + t3/2"] + [f"t{k + 2}/2" for k in range(2, top - 1)]
    return {
        "name": name,
        "description": "x = z^2 + t1, y = -(z - 1/2 sum_k t_(k+2) z^k)",
        "parameters": params,
        "x": {"numerator": ["t1", "0", "1"], "denominator": ["1"]},
        "y": {"numerator": y, "denominator": ["1"]},
    }


def main():
    pg = build_pq(PQModel(3, 2, {1: 3}))
    specs = {
        "airy": curve_to_spec(build_airy()),
        "pure-gravity": {**curve_to_spec(pg), "name": "pure-gravity",
                         "description": "(3,2) minimal model at v = 1: x = z^2 - 2, y = z^3 - 3z"},
        "pure-gravity-swapped": {**curve_to_spec(apply_transform(pg, SymplecticTransform("swap_xy"))),
                                 "name": "pure-gravity-swapped", "description": "pure gravity with x and y exchanged"},
        "kontsevich-zero": kontsevich_spec("kontsevich-zero", {}),
        "kontsevich-1111": kontsevich_spec("kontsevich-1111", {3: 1, 5: 1, 7: 1, 9: 1}),
    }
    Qc, Pc = ising_polynomials(1, 0, 0)
    pq43 = build_pq_from_polynomials(Qc, Pc, 4, 3)
    specs["pq-4-3"] = {**curve_to_spec(pq43), "name": "pq-4-3",
                       "description": "(4,3) Ising curve at v = 1, w = 0, t5 = 0"}
    for s in ("1/5", "1/100", "1/1000"):
        tag = s.replace("/", "_")
        specs[f"quartic-onecut-s{tag}"] = {**curve_to_spec(quartic_onecut_curve(Q(s))),
                                           "name": f"quartic-onecut-s{tag}",
                                           "description": f"quartic one-cut family at s = {s} (t = s^2)"}
    OUT.mkdir(parents=True, exist_ok=True)
    for name, spec in specs.items():
        spec.setdefault("name", name)
        curve_from_spec(spec)
        (OUT / f"{name}.json").write_text(json.dumps(spec, indent=2) + "\n")
        print(name)


if __name__ == "__main__":
    main()
