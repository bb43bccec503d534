"""JSON forms for elements, lamp elements, verdicts and reports.

Numbers are strings: "m/n^e" for breakpoints and "p/q" for other rationals.
"""
from __future__ import annotations

import json
from typing import Any

from .exactnum import ParseError, format_nadic, format_rational, parse_rational
from .plmap import InvalidPLMap, PLMap


class ValidationError(ValueError):
    pass


def element_to_json(g: PLMap) -> dict:
    return {
        "n": g.n,
        "orientation": g.orientation,
        "breakpoints": [[format_nadic(x, g.n), format_nadic(y, g.n)] for x, y in zip(g.xs, g.ys)],
    }


def element_from_json(obj: Any) -> PLMap:
    if not isinstance(obj, dict):
        raise ValidationError("element: expected an object with n, orientation, breakpoints")
    try:
        n = obj["n"]
        pts = obj["breakpoints"]
    except KeyError as err:
        raise ValidationError(f"element: missing field {err}") from None
    if not isinstance(n, int) or not isinstance(pts, list):
        raise ValidationError("element: n must be an integer and breakpoints a list")
    xs, ys = [], []
    for i, pair in enumerate(pts):
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, str) for v in pair)):
            raise ValidationError(f"breakpoints[{i}]: expected a pair of strings")
        try:
            xs.append(parse_rational(pair[0]))
            ys.append(parse_rational(pair[1]))
        except ParseError as err:
            raise ValidationError(f"breakpoints[{i}]: {err}") from None
    try:
        return PLMap(n, xs, ys, obj.get("orientation", 1))
    except (InvalidPLMap, ValueError) as err:
        raise ValidationError(f"element: {err}") from None


def loads_checked(text: str, source: str = "<input>") -> Any:
    """json.loads with the error position spelled out."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ValidationError(f"{source}: line {err.lineno} column {err.colno}: {err.msg}") from None


def lamp_to_json(u) -> dict:
    return {"shift": u.shift, "lamps": {str(i): u.group.to_json(x) for i, x in u.lamps}}


def lamp_from_json(obj: Any, group):
    from .lamplighter import LampError, lamp_elt

    if not isinstance(obj, dict) or not isinstance(obj.get("lamps", {}), dict):
        raise ValidationError("lamp element: expected {\"shift\": k, \"lamps\": {...}}")
    try:
        lamps = {int(k): group.from_json(v) for k, v in obj.get("lamps", {}).items()}
        return lamp_elt(group, lamps, int(obj.get("shift", 0)))
    except (LampError, ValueError) as err:
        raise ValidationError(f"lamp element: {err}") from None


def witness_to_json(w) -> Any:
    if w is None:
        return None
    if isinstance(w, PLMap):
        return element_to_json(w)
    return lamp_to_json(w)


def verdict_to_json(v) -> dict:
    return {
        "verdict": str(v),
        "kind": v.kind,
        "k": v.k,
        "k_max": v.k_max,
        "exact": v.exact,
        "note": v.note,
        "witness": witness_to_json(v.witness),
    }


def rational(x) -> str:
    return format_rational(x)


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators."""
    return json.dumps(obj, sort_keys=True, indent=2)
