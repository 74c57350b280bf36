"""JSON interchange for series, arcs, and germ models, plus inline arc text.

Rationals travel as reduced [numerator, denominator] pairs with a positive
denominator; documents that break that convention are rejected, never
repaired, and every error message carries the JSON path to the offending
value.  Series literals are lists of
[exponent_numerator, exponent_denominator, coefficient_numerator,
coefficient_denominator] quadruples together with a truncation rational.
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction

from .arcs import Arc
from .germs import (
    Adjacency,
    GermModel,
    Monomial,
    PancakeDecomposition,
    RationalMap,
    Sheet,
)
from .puiseux import DEFAULT_MAX_RAMIFICATION, DEFAULT_TRUNCATION, PuiseuxSeries

SCHEMA_VERSION = "1"


class GermSpecError(ValueError):
    """A malformed or invariant-breaking document."""


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise GermSpecError(f"{path}: {message}")


def _as_int(obj, path: str) -> int:
    _require(isinstance(obj, int) and not isinstance(obj, bool), path,
             f"expected an integer, got {obj!r}")
    return obj


def _rational(obj, path: str) -> Fraction:
    _require(
        isinstance(obj, (list, tuple)) and len(obj) == 2,
        path, f"expected a [numerator, denominator] pair, got {obj!r}",
    )
    num = _as_int(obj[0], f"{path}[0]")
    den = _as_int(obj[1], f"{path}[1]")
    _require(den > 0, path, f"denominator must be positive, got {den}")
    _require(math.gcd(num, den) == 1, path,
             f"fraction {num}/{den} is not reduced")
    return Fraction(num, den)


def _pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


# -- series ------------------------------------------------------------------


def parse_series(obj, path: str = "series",
                 max_denominator: int = DEFAULT_MAX_RAMIFICATION) -> PuiseuxSeries:
    _require(isinstance(obj, dict), path, "expected an object")
    _require("terms" in obj, path, "missing 'terms'")
    _require("truncation" in obj, path, "missing 'truncation'")
    unknown = set(obj) - {"terms", "truncation"}
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")
    truncation = _rational(obj["truncation"], f"{path}.truncation")
    _require(truncation > 0, f"{path}.truncation", "must be positive")
    raw = obj["terms"]
    _require(isinstance(raw, list), f"{path}.terms", "expected a list")
    terms: list[tuple[Fraction, Fraction]] = []
    last: Fraction | None = None
    for i, quad in enumerate(raw):
        tpath = f"{path}.terms[{i}]"
        _require(
            isinstance(quad, (list, tuple)) and len(quad) == 4,
            tpath, f"expected a quadruple, got {quad!r}",
        )
        exponent = _rational(quad[:2], tpath)
        coefficient = _rational(quad[2:], tpath)
        _require(exponent >= 0, tpath, "exponent must be nonnegative")
        _require(coefficient != 0, tpath, "zero coefficient term")
        _require(exponent < truncation, tpath,
                 f"exponent {exponent} not below truncation {truncation}")
        _require(last is None or exponent > last, tpath,
                 "exponents must be strictly increasing")
        last = exponent
        terms.append((exponent, coefficient))
    return PuiseuxSeries(terms, truncation, max_denominator=max_denominator)


def serialize_series(s: PuiseuxSeries) -> dict:
    return {
        "terms": [
            [e.numerator, e.denominator, c.numerator, c.denominator]
            for e, c in s.terms
        ],
        "truncation": _pair(s.truncation),
    }


# -- arcs ----------------------------------------------------------------------


def parse_arc(obj, path: str = "arc",
              max_denominator: int = DEFAULT_MAX_RAMIFICATION) -> Arc:
    _require(isinstance(obj, dict), path, "expected an object")
    _require("components" in obj, path, "missing 'components'")
    unknown = set(obj) - {"components", "distance_parametrized", "label"}
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")
    comps_raw = obj["components"]
    _require(isinstance(comps_raw, list) and comps_raw, f"{path}.components",
             "expected a nonempty list")
    comps = tuple(
        parse_series(c, f"{path}.components[{i}]", max_denominator)
        for i, c in enumerate(comps_raw)
    )
    flag = obj.get("distance_parametrized", False)
    _require(isinstance(flag, bool), f"{path}.distance_parametrized",
             "expected a boolean")
    label = obj.get("label")
    _require(label is None or isinstance(label, str), f"{path}.label",
             "expected a string")
    try:
        return Arc(comps, distance_parametrized=flag, label=label)
    except ValueError as exc:
        raise GermSpecError(f"{path}: {exc}") from exc


def serialize_arc(arc: Arc) -> dict:
    out: dict = {
        "components": [serialize_series(c) for c in arc.components],
        "distance_parametrized": arc.distance_parametrized,
    }
    if arc.label is not None:
        out["label"] = arc.label
    return out


# -- germ models ---------------------------------------------------------------


def _parse_monomial(obj, path: str, param_dim: int) -> Monomial:
    _require(isinstance(obj, dict), path, "expected an object")
    unknown = set(obj) - {"coefficient", "powers"}
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")
    _require("coefficient" in obj, path, "missing 'coefficient'")
    _require("powers" in obj, path, "missing 'powers'")
    coeff = _rational(obj["coefficient"], f"{path}.coefficient")
    _require(coeff != 0, f"{path}.coefficient", "zero coefficient")
    raw = obj["powers"]
    _require(
        isinstance(raw, list) and len(raw) == param_dim,
        f"{path}.powers", f"expected {param_dim} power entries",
    )
    powers = tuple(
        _rational(p, f"{path}.powers[{i}]") for i, p in enumerate(raw)
    )
    for i, p in enumerate(powers):
        _require(p >= 0, f"{path}.powers[{i}]", "power must be nonnegative")
    return Monomial(coeff, powers)


def _parse_map(obj, path: str, param_dim: int) -> RationalMap:
    _require(isinstance(obj, dict), path, "expected an object")
    unknown = set(obj) - {"numerator", "denominator"}
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")
    _require("numerator" in obj, path, "missing 'numerator'")
    num_raw = obj["numerator"]
    _require(isinstance(num_raw, list), f"{path}.numerator", "expected a list")
    numerator = tuple(
        _parse_monomial(m, f"{path}.numerator[{i}]", param_dim)
        for i, m in enumerate(num_raw)
    )
    den_raw = obj.get("denominator", [])
    _require(isinstance(den_raw, list), f"{path}.denominator", "expected a list")
    denominator = tuple(
        _parse_monomial(m, f"{path}.denominator[{i}]", param_dim)
        for i, m in enumerate(den_raw)
    )
    return RationalMap(numerator, denominator)


def _parse_sheet(obj, path: str, ambient_dim: int) -> Sheet:
    _require(isinstance(obj, dict), path, "expected an object")
    unknown = set(obj) - {"components", "bounds", "angular"}
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")
    for key in ("components", "bounds", "angular"):
        _require(key in obj, path, f"missing '{key}'")
    bounds_raw = obj["bounds"]
    _require(
        isinstance(bounds_raw, list) and len(bounds_raw) in (1, 2),
        f"{path}.bounds", "expected one or two parameter intervals",
    )
    bounds = []
    for i, b in enumerate(bounds_raw):
        bpath = f"{path}.bounds[{i}]"
        _require(
            isinstance(b, dict) and set(b) == {"lo", "hi"},
            bpath, "expected an object with 'lo' and 'hi'",
        )
        lo = _rational(b["lo"], f"{bpath}.lo")
        hi = _rational(b["hi"], f"{bpath}.hi")
        _require(lo < hi, bpath, f"empty interval [{lo}, {hi}]")
        bounds.append((lo, hi))
    param_dim = len(bounds)
    angular_raw = obj["angular"]
    _require(
        isinstance(angular_raw, list)
        and len(angular_raw) == param_dim
        and all(isinstance(a, bool) for a in angular_raw),
        f"{path}.angular", f"expected {param_dim} booleans",
    )
    comps_raw = obj["components"]
    _require(
        isinstance(comps_raw, list) and len(comps_raw) == ambient_dim,
        f"{path}.components", f"expected {ambient_dim} component maps",
    )
    comps = tuple(
        _parse_map(c, f"{path}.components[{i}]", param_dim)
        for i, c in enumerate(comps_raw)
    )
    try:
        return Sheet(comps, tuple(bounds), tuple(angular_raw))
    except ValueError as exc:
        raise GermSpecError(f"{path}: {exc}") from exc


def _parse_pancakes(obj, path: str, n_sheets: int,
                    ambient_dim: int) -> PancakeDecomposition:
    _require(isinstance(obj, dict), path, "expected an object")
    unknown = set(obj) - {"groups", "adjacencies"}
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")
    _require("groups" in obj, path, "missing 'groups'")
    groups_raw = obj["groups"]
    _require(isinstance(groups_raw, list) and groups_raw, f"{path}.groups",
             "expected a nonempty list")
    groups = []
    for i, g in enumerate(groups_raw):
        gpath = f"{path}.groups[{i}]"
        _require(isinstance(g, list) and g, gpath, "expected a nonempty list")
        members = tuple(_as_int(s, f"{gpath}[{j}]") for j, s in enumerate(g))
        for j, s in enumerate(members):
            _require(0 <= s < n_sheets, f"{gpath}[{j}]",
                     f"sheet index {s} out of range")
        groups.append(members)
    adjacencies = []
    for i, a in enumerate(obj.get("adjacencies", [])):
        apath = f"{path}.adjacencies[{i}]"
        _require(
            isinstance(a, dict) and "pancakes" in a,
            apath, "expected an object with 'pancakes'",
        )
        unknown = set(a) - {"pancakes", "curve"}
        _require(not unknown, apath, f"unknown keys {sorted(unknown)}")
        pk_raw = a["pancakes"]
        _require(
            isinstance(pk_raw, list) and len(pk_raw) == 2,
            f"{apath}.pancakes", "expected a pair of pancake indices",
        )
        pair = (_as_int(pk_raw[0], f"{apath}.pancakes[0]"),
                _as_int(pk_raw[1], f"{apath}.pancakes[1]"))
        curve_raw = a.get("curve")
        if curve_raw is None:
            curve = None
        else:
            _require(
                isinstance(curve_raw, list) and len(curve_raw) == ambient_dim,
                f"{apath}.curve", f"expected {ambient_dim} series components",
            )
            curve = tuple(
                parse_series(c, f"{apath}.curve[{j}]")
                for j, c in enumerate(curve_raw)
            )
        adjacencies.append(Adjacency(pair, curve))
    return PancakeDecomposition(tuple(groups), tuple(adjacencies))


def parse_germ_spec(text: str) -> GermModel:
    """Validated germ model from a JSON document string."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GermSpecError(f"document: invalid JSON ({exc})") from exc
    _require(isinstance(obj, dict), "document", "expected a JSON object")
    allowed = {"schema_version", "name", "ambient_dimension", "radius",
               "sheets", "pancakes"}
    unknown = set(obj) - allowed
    _require(not unknown, "document", f"unknown keys {sorted(unknown)}")
    version = obj.get("schema_version")
    _require(version == SCHEMA_VERSION, "document.schema_version",
             f"expected {SCHEMA_VERSION!r}, got {version!r}")
    name = obj.get("name", "germ")
    _require(isinstance(name, str) and name, "document.name",
             "expected a nonempty string")
    dim = _as_int(obj.get("ambient_dimension"), "document.ambient_dimension")
    _require(dim >= 1, "document.ambient_dimension", "must be at least 1")
    radius = _rational(obj["radius"], "document.radius") \
        if "radius" in obj else Fraction(1, 2)
    _require(radius > 0, "document.radius", "must be positive")
    sheets_raw = obj.get("sheets")
    _require(isinstance(sheets_raw, list) and sheets_raw, "document.sheets",
             "expected a nonempty list")
    sheets = [
        _parse_sheet(s, f"document.sheets[{i}]", dim)
        for i, s in enumerate(sheets_raw)
    ]
    pancakes = None
    if "pancakes" in obj and obj["pancakes"] is not None:
        pancakes = _parse_pancakes(obj["pancakes"], "document.pancakes",
                                   len(sheets), dim)
    try:
        return GermModel(name, dim, sheets, pancakes, radius=radius)
    except ValueError as exc:
        raise GermSpecError(f"document: {exc}") from exc


def _serialize_monomial(m: Monomial) -> dict:
    return {
        "coefficient": _pair(m.coeff),
        "powers": [_pair(p) for p in m.powers],
    }


def _serialize_map(m: RationalMap) -> dict:
    out: dict = {"numerator": [_serialize_monomial(x) for x in m.numerator]}
    if m.denominator:
        out["denominator"] = [_serialize_monomial(x) for x in m.denominator]
    return out


def serialize_germ(germ: GermModel) -> dict:
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "name": germ.name,
        "ambient_dimension": germ.ambient_dim,
        "radius": _pair(germ.radius),
        "sheets": [
            {
                "components": [_serialize_map(c) for c in sheet.components],
                "bounds": [
                    {"lo": _pair(lo), "hi": _pair(hi)}
                    for lo, hi in sheet.bounds
                ],
                "angular": list(sheet.angular),
            }
            for sheet in germ.sheets
        ],
    }
    if germ.pancakes is not None:
        doc["pancakes"] = {
            "groups": [list(g) for g in germ.pancakes.groups],
            "adjacencies": [
                {
                    "pancakes": list(adj.pancakes),
                    "curve": None if adj.curve is None
                    else [serialize_series(c) for c in adj.curve],
                }
                for adj in germ.pancakes.adjacencies
            ],
        }
    return doc


def germ_spec_json(germ: GermModel) -> str:
    return json.dumps(serialize_germ(germ), sort_keys=True, indent=2) + "\n"


# -- inline arc text -----------------------------------------------------------

_CHUNK_RE = re.compile(
    r"""^
    (?:(?P<coef>\d+(?:/\d+)?)\s*\*?\s*)?     # optional rational coefficient
    (?P<var>t
        (?:\^(?:\((?P<pexp>-?\d+(?:/\d+)?)\)|(?P<exp>\d+(?:/\d+)?)))?
    )?
    $""",
    re.VERBOSE,
)


def _split_top_level(text: str, sep: str) -> list[str]:
    parts, depth, buf = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise GermSpecError("arc text: unbalanced parentheses")
        if ch == sep and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if depth != 0:
        raise GermSpecError("arc text: unbalanced parentheses")
    parts.append("".join(buf))
    return parts


def parse_series_text(text: str,
                      truncation: Fraction = DEFAULT_TRUNCATION) -> PuiseuxSeries:
    """One series from text like ``t - 2*t^2 + t^(3/2)`` or ``0``."""
    s = text.strip()
    if not s:
        raise GermSpecError("arc text: empty series (use '0' for zero)")
    if s == "0":
        return PuiseuxSeries.zero(truncation)
    # Normalize to an explicit leading sign, then split into signed chunks.
    if s[0] not in "+-":
        s = "+" + s
    chunks: list[tuple[int, str]] = []
    depth = 0
    current: list[str] = []
    sign = 1
    pending = False
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0:
            if current:
                chunks.append((sign, "".join(current)))
            elif pending:
                raise GermSpecError(f"arc text: dangling sign in {text!r}")
            sign = 1 if ch == "+" else -1
            pending = True
            current = []
        elif not ch.isspace():
            current.append(ch)
            pending = False
    if current:
        chunks.append((sign, "".join(current)))
    elif pending:
        raise GermSpecError(f"arc text: dangling sign in {text!r}")
    terms: dict[Fraction, Fraction] = {}
    for sgn, chunk in chunks:
        m = _CHUNK_RE.match(chunk)
        if not m or (m.group("coef") is None and m.group("var") is None):
            raise GermSpecError(f"arc text: cannot parse term {chunk!r}")
        try:
            coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
            if m.group("var") is None:
                exponent = Fraction(0)
            elif m.group("pexp") is not None:
                exponent = Fraction(m.group("pexp"))
            elif m.group("exp") is not None:
                exponent = Fraction(m.group("exp"))
            else:
                exponent = Fraction(1)
        except ZeroDivisionError:
            raise GermSpecError(
                f"arc text: zero denominator in {chunk!r}") from None
        if exponent < 0:
            raise GermSpecError(f"arc text: negative exponent in {chunk!r}")
        terms[exponent] = terms.get(exponent, Fraction(0)) + sgn * coef
    return PuiseuxSeries(
        [(e, c) for e, c in terms.items() if c != 0], truncation
    )


def parse_arc_text(text: str,
                   truncation: Fraction = DEFAULT_TRUNCATION,
                   label: str | None = None) -> Arc:
    """An arc from text like ``(t, t^(3/2), 0)``.

    Components are comma-separated series in the variable t; each must
    vanish at 0.
    """
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise GermSpecError("arc text must be parenthesized: (comp, comp, ...)")
    body = s[1:-1]
    parts = _split_top_level(body, ",")
    if not any(p.strip() for p in parts):
        raise GermSpecError("arc text: no components")
    comps = tuple(parse_series_text(p, truncation) for p in parts)
    try:
        return Arc(comps, label=label)
    except ValueError as exc:
        raise GermSpecError(f"arc text: {exc}") from exc
