"""JSON codecs for every object the service and CLI exchange.

Rationals travel as strings "p/q" (or "p" when integral) so nothing is
lost in transit; floats stay floats.  Subsets appear in JSON as sorted
lists of 1-based member indices and internally as bitmasks.
"""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction
from typing import Any, Union

from .chaos import ChaosSum
from .extremal import (
    ComboOuter,
    ConvexSpec,
    ExpOuter,
    HingeOuter,
    OuterConvex,
    PowerOuter,
    QuasiPolynomial,
)
from .stepfn import StepFn, as_rational
from .systems import Bounds, BoundedSystem, mask_of, members_of
from .trig import (
    ComboYoung,
    ExpYoung,
    PowerYoung,
    TLogYoung,
    TrigPoly,
    TrigTerm,
    YoungFn,
)

Rationalish = Union[str, int, float]


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(x: Rationalish) -> Fraction:
    return as_rational(x)


# -- step functions and systems ----------------------------------------------


def step_to_dict(f: StepFn) -> dict:
    return {
        "domain_end": rational_str(f.domain_end),
        "breakpoints": [rational_str(b) for b in f.breakpoints],
        "values": [rational_str(v) for v in f.values],
    }


def step_from_dict(d: dict) -> StepFn:
    return StepFn(
        parse_rational(d["domain_end"]),
        tuple(parse_rational(b) for b in d["breakpoints"]),
        tuple(parse_rational(v) for v in d["values"]),
    )


def bounds_to_dict(b: Bounds) -> dict:
    return {"A": rational_str(b.lower), "B": rational_str(b.upper)}


def bounds_from_dict(d: dict) -> Bounds:
    lo = d.get("A", d.get("lower"))
    up = d.get("B", d.get("upper"))
    if lo is None or up is None:
        raise ValueError("bounds need keys A and B")
    return Bounds(parse_rational(lo), parse_rational(up))


def system_to_dict(sys: BoundedSystem) -> dict:
    return {
        "members": [step_to_dict(m) for m in sys.members],
        "bounds": [bounds_to_dict(b) for b in sys.bounds],
    }


def system_from_dict(d: dict) -> BoundedSystem:
    return BoundedSystem(
        tuple(step_from_dict(m) for m in d["members"]),
        tuple(bounds_from_dict(b) for b in d["bounds"]),
    )


# -- convex specifications ----------------------------------------------------


def _members_list(mask: int) -> list[int]:
    return list(members_of(mask))


def outer_to_dict(outer: OuterConvex) -> dict:
    if isinstance(outer, PowerOuter):
        return {"kind": "pow", "q": rational_str(outer.exponent)}
    if isinstance(outer, ExpOuter):
        return {"kind": "exp", "c": rational_str(outer.rate)}
    if isinstance(outer, HingeOuter):
        return {"kind": "relu", "a": rational_str(outer.shift)}
    if isinstance(outer, ComboOuter):
        return {
            "kind": "combo",
            "constant": rational_str(outer.constant),
            "parts": [
                {"weight": rational_str(w), "outer": outer_to_dict(p)}
                for w, p in outer.parts
            ],
        }
    raise TypeError(f"unknown outer convex function {outer!r}")


def outer_from_dict(d: dict) -> OuterConvex:
    kind = d["kind"]
    if kind == "pow":
        return PowerOuter(parse_rational(d["q"]))
    if kind == "exp":
        return ExpOuter(parse_rational(d["c"]))
    if kind == "relu":
        return HingeOuter(parse_rational(d["a"]))
    if kind == "combo":
        return ComboOuter(
            tuple(
                (parse_rational(p["weight"]), outer_from_dict(p["outer"]))
                for p in d["parts"]
            ),
            parse_rational(d.get("constant", 0)),
        )
    raise ValueError(f"unknown outer kind {kind!r}")


def convex_to_dict(spec: ConvexSpec) -> dict:
    return {
        "n": spec.polys[0].n if spec.polys else 0,
        "polys": [
            {
                "terms": [
                    {
                        "mask": _members_list(mask),
                        "coeff": [rational_str(c) for c in coeff],
                    }
                    for mask, coeff in poly.terms
                ]
            }
            for poly in spec.polys
        ],
        "norm": "inf" if spec.norm == math.inf else rational_str(spec.norm),
        "outer": outer_to_dict(spec.outer),
    }


def convex_from_dict(d: dict, n: int | None = None) -> ConvexSpec:
    if n is None:
        n = d.get("n")
    if n is None:
        n = max(
            (max(t["mask"], default=0) for p in d["polys"] for t in p["terms"]),
            default=0,
        )
    polys = []
    for p in d["polys"]:
        terms = tuple(
            (mask_of(t["mask"]), tuple(parse_rational(c) for c in t["coeff"]))
            for t in p["terms"]
        )
        out_dim = len(terms[0][1]) if terms else 1
        polys.append(QuasiPolynomial(n, out_dim, terms))
    norm_raw = d.get("norm", "2")
    norm = math.inf if str(norm_raw) in ("inf", "Infinity") else parse_rational(norm_raw)
    return ConvexSpec(tuple(polys), norm, outer_from_dict(d["outer"]))


# -- chaos sums ----------------------------------------------------------------


def chaos_to_dict(s: ChaosSum) -> dict:
    base: Any
    if isinstance(s.base, int):
        base = "rademacher"
    else:
        base = system_to_dict(s.base)
    return {
        "base": base,
        "n": s.n_members,
        "order": s.order,
        "terms": [
            {
                "mask": _members_list(mask),
                "coeff": [rational_str(c) for c in coeff],
            }
            for mask, coeff in s.terms
        ],
    }


def chaos_from_dict(d: dict) -> ChaosSum:
    terms = tuple(
        (mask_of(t["mask"]), tuple(parse_rational(c) for c in t["coeff"]))
        for t in d["terms"]
    )
    order = d.get("order")
    if order is None:
        order = max((mask.bit_count() for mask, _ in terms), default=1)
    raw_base = d.get("base", "rademacher")
    if raw_base == "rademacher" or raw_base is None:
        n = d.get("n")
        if n is None:
            n = max((mask.bit_length() for mask, _ in terms), default=1)
        base: Any = int(n)
    else:
        base = system_from_dict(raw_base)
    return ChaosSum(base, terms, int(order))


# -- trigonometric polynomials -------------------------------------------------


def trig_to_dict(p: TrigPoly) -> dict:
    return {
        "terms": [
            {"freq": t.freq, "phase": t.phase, "coeff": t.coeff} for t in p.terms
        ]
    }


def trig_from_dict(d: dict) -> TrigPoly:
    return TrigPoly(
        tuple(
            TrigTerm(int(t["freq"]), float(t.get("phase", 0.0)), float(t["coeff"]))
            for t in d["terms"]
        )
    )


# -- Young functions -----------------------------------------------------------


def young_to_dict(phi: YoungFn) -> dict:
    if isinstance(phi, PowerYoung):
        return {"kind": "pow", "p": phi.p}
    if isinstance(phi, TLogYoung):
        return {"kind": "tlog"}
    if isinstance(phi, ExpYoung):
        return {"kind": "expm"}
    if isinstance(phi, ComboYoung):
        return {
            "kind": "combo",
            "parts": [
                {"weight": w, "young": young_to_dict(p)} for w, p in phi.parts
            ],
        }
    raise TypeError(f"unknown Young function {phi!r}")


def young_from_dict(d: dict) -> YoungFn:
    kind = d["kind"]
    if kind == "pow":
        return PowerYoung(float(d["p"]))
    if kind == "tlog":
        return TLogYoung()
    if kind == "expm":
        return ExpYoung()
    if kind == "combo":
        return ComboYoung(
            tuple(
                (float(p["weight"]), young_from_dict(p["young"]))
                for p in d["parts"]
            )
        )
    raise ValueError(f"unknown Young kind {kind!r}")


def parse_young_text(text: str) -> YoungFn:
    """Parse the CLI shorthand: "pow:4", "tlog", "expm"."""
    text = text.strip().lower()
    if text == "tlog":
        return TLogYoung()
    if text == "expm":
        return ExpYoung()
    if text.startswith("pow:"):
        return PowerYoung(float(text.split(":", 1)[1]))
    raise ValueError(f"cannot parse Young function {text!r}")


def parse_outer_text(text: str) -> OuterConvex:
    """Parse the CLI shorthand: "pow:4", "exp:1", "relu:1/2"."""
    text = text.strip().lower()
    for prefix, build in (
        ("pow:", lambda a: PowerOuter(parse_rational(a))),
        ("exp:", lambda a: ExpOuter(parse_rational(a))),
        ("relu:", lambda a: HingeOuter(parse_rational(a))),
    ):
        if text.startswith(prefix):
            return build(text.split(":", 1)[1])
    raise ValueError(f"cannot parse outer convex function {text!r}")


# -- generic helpers -----------------------------------------------------------


def jsonable(obj: Any) -> Any:
    """Recursively convert Fractions to strings and dataclass-ish objects
    (anything with __dict__ or _asdict) to plain dicts for JSON output."""
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, StepFn):
        return step_to_dict(obj)
    if isinstance(obj, BoundedSystem):
        return system_to_dict(obj)
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, frozenset):
        return sorted(jsonable(v) for v in obj)
    if hasattr(obj, "_asdict"):
        return jsonable(obj._asdict())
    if hasattr(obj, "__dataclass_fields__"):
        return {
            name: jsonable(getattr(obj, name))
            for name in obj.__dataclass_fields__
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def digest(obj: Any) -> str:
    """Stable sha256 hex digest of the canonical JSON form."""
    payload = json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
