"""Normal-embedding criterion: order comparison, witness search, diagnostics.

A germ fails to be normally embedded exactly when some arc pair has inner
contact order strictly below its outer contact order.  The engine compares
the two orders on sampled pairs, cross-checks any candidate witness with an
independent tangency detector on random point pairs, and reports either a
reproducible witness or an honest "no witness found within budget".
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .arcs import Arc, outer_contact_order, reparametrize_by_distance
from .fit import geometric_scales, loglog_slope
from .germs import GermError, GermModel, point_at_radius, sample_arcs
from .inner import (
    DEGENERATE_DISTANCE,
    InnerOrderEstimate,
    inner_contact_order,
    inner_distance,
    _use_pancakes,
)
from .germspec import SCHEMA_VERSION, serialize_arc
from .mesh import MeshError
from .puiseux import ContactOrder

# A witness needs the snapped inner order to sit strictly below the outer
# order by more than this, so snapping jitter can never manufacture one.
WITNESS_ORDER_GAP = 0.1
# A bounded inner/outer distance ratio with no scaling trend certifies equal
# contact orders; the witness configurations show exponents near -1/2.
RATIO_FLAT_TOLERANCE = 0.05
RATIO_EQUAL_CAP = 10.0

# Slope of log(max ratio) vs log(t) at or below which the ratio is treated
# as unbounded for t -> 0 (the pair map leans into the vertical axis).
TANGENCY_SLOPE = -0.1


@dataclass(frozen=True)
class CriterionReport:
    """Outer vs inner contact order for one arc pair.

    ``equal`` is three-valued: "equal" (orders agree as exact rationals),
    "witness" (snapped inner strictly below finite outer, gap above 0.1),
    or "inconclusive" (truncation-limited outer, unsnapped inner fit, or a
    backend failure recorded in ``notes``).  ``table`` rows are
    (t, outer distance, inner distance).
    """

    pair: tuple[str, str]
    outer_order: ContactOrder
    inner_order: InnerOrderEstimate
    equal: str
    ratio_exponent: float
    table: tuple[tuple[float, float, float], ...]
    arcs: tuple[Arc, Arc]
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class LipschitzProbe:
    """Does d_inn <= k * d_out hold across the scale sweep for this pair?"""

    k: float
    passed: bool
    max_ratio: float
    table: tuple[tuple[float, float], ...]  # (t, ratio)


@dataclass(frozen=True)
class UltrametricReport:
    """Exact pairwise orders of an arc triple, ascending; holds means the
    two smallest coincide.  None when any order is truncation-limited."""

    holds: bool | None
    orders: tuple[ContactOrder, ContactOrder, ContactOrder]
    note: str = ""


@dataclass(frozen=True)
class ScatterReport:
    """Matched-radius point-pair scatter: rows are (t, d_out, d_inn)."""

    rows: tuple[tuple[float, float, float], ...]
    max_ratio_per_scale: tuple[tuple[float, float], ...]
    ratio_slope: float
    tangent: bool
    pairs_per_scale: int
    seed: int


@dataclass(frozen=True)
class Verdict:
    germ_name: str
    outcome: str  # "NotNormallyEmbedded" | "NoWitnessFound"
    witness: CriterionReport | None
    budget: int
    seed: int
    arcs_sampled: int
    pairs_tested: int
    inconclusive_pairs: tuple[tuple[str, str], ...]
    max_ratio_per_scale: tuple[tuple[float, float], ...]
    min_order_gap: float | None
    scatter: ScatterReport
    notes: tuple[str, ...] = ()


def _arc_name(arc: Arc, fallback: str) -> str:
    return arc.label if arc.label is not None else fallback


def _ratio_slope(table) -> float:
    ts, ratios = [], []
    for t, d_out, d_inn in table:
        if d_out > DEGENERATE_DISTANCE and d_inn > DEGENERATE_DISTANCE:
            ts.append(t)
            ratios.append(d_inn / d_out)
    if len(ts) < 4:
        return math.nan
    slope, _ = loglog_slope(ts, ratios)
    return slope


def compare_orders(
    germ: GermModel,
    a: Arc,
    b: Arc,
    scales=None,
    *,
    method: str = "auto",
    resolution_divisor: int = 64,
    snap_denominator: int = 12,
    snap_tolerance: float = 0.05,
) -> CriterionReport:
    """Exact outer order vs fitted inner order for one arc pair."""
    a = reparametrize_by_distance(a)
    b = reparametrize_by_distance(b)
    pair = (_arc_name(a, "arc0"), _arc_name(b, "arc1"))
    outer = outer_contact_order(a, b)
    notes: list[str] = []
    try:
        inner = inner_contact_order(
            germ, a, b, scales,
            method=method,
            resolution_divisor=resolution_divisor,
            snap_denominator=snap_denominator,
            snap_tolerance=snap_tolerance,
        )
    except (MeshError, GermError) as exc:
        notes.append(f"inner metric failed: {exc}")
        inner = InnerOrderEstimate(math.nan, None, 0.0, (), degenerate=True)
    table = tuple(
        (t, float(np.linalg.norm(a.evaluate(t) - b.evaluate(t))), d)
        for t, d in inner.samples
    )
    ratio_exponent = _ratio_slope(table)
    max_ratio = max(
        (
            d_inn / d_out
            for _, d_out, d_inn in table
            if d_out > DEGENERATE_DISTANCE and d_inn > DEGENERATE_DISTANCE
        ),
        default=math.nan,
    )

    if outer.is_finite and not inner.degenerate and inner.snapped != outer.value:
        if (
            inner.snapped is not None
            and abs(inner.slope - float(outer.value)) <= snap_tolerance
        ):
            # Inner distance dominates outer, so the inner order never truly
            # exceeds the outer one.  With the fitted slope inside snap
            # tolerance of the exact outer order, equality is the hypothesis
            # to accept; the nearest rational in the denominator budget may
            # sit closer to the raw float.
            inner = replace(inner, snapped=outer.value)
        elif (
            math.isfinite(ratio_exponent)
            and abs(ratio_exponent) <= RATIO_FLAT_TOLERANCE
            and max_ratio <= RATIO_EQUAL_CAP
        ):
            # Orders are invariant under bounded multiplicative error, so a
            # trend-free bounded inner/outer ratio pins the inner order to
            # the exact outer one even when subleading terms bias the raw
            # slope fit off the true power.
            inner = replace(inner, snapped=outer.value)
            notes.append(
                "inner order pinned by flat bounded inner/outer distance "
                f"ratio (exponent {ratio_exponent:.4f}, max {max_ratio:.3f})"
            )

    if not outer.is_finite:
        if inner.degenerate:
            notes.append(
                "arcs agree to working truncation; orders not observable"
            )
        else:
            notes.append(f"outer order truncation-limited ({outer})")
        equal = "inconclusive"
    elif inner.snapped is None:
        if inner.degenerate:
            notes.append("inner distances below resolution at every scale")
        else:
            notes.append(
                f"inner fit did not snap (slope {inner.slope:.4f}, "
                f"R^2 {inner.r_squared:.4f})"
            )
        equal = "inconclusive"
    elif inner.snapped == outer.value:
        equal = "equal"
    elif inner.snapped < outer.value:
        gap = float(outer.value - inner.snapped)
        if gap > WITNESS_ORDER_GAP:
            equal = "witness"
        else:
            notes.append(f"order gap {gap:.3f} below witness threshold")
            equal = "inconclusive"
    else:
        notes.append(
            f"snapped inner order {inner.snapped} exceeds outer {outer.value}; "
            "inner distances should dominate outer"
        )
        equal = "inconclusive"
    return CriterionReport(
        pair=pair,
        outer_order=outer,
        inner_order=inner,
        equal=equal,
        ratio_exponent=ratio_exponent,
        table=table,
        arcs=(a, b),
        notes=tuple(notes),
    )


def lipschitz_probe(
    germ: GermModel,
    a: Arc,
    b: Arc,
    k: float,
    scales=None,
    *,
    method: str = "auto",
    resolution_divisor: int = 64,
) -> LipschitzProbe:
    """Check d_inn <= k * d_out between matched points at every scale.

    With the chain metric available the sweep reaches much deeper scales
    than meshes allow, which is what lets a genuine witness outrun any
    fixed k at desk scale.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    a = reparametrize_by_distance(a)
    b = reparametrize_by_distance(b)
    if scales is None:
        scales = geometric_scales(4, 24) if _use_pancakes(germ, method) \
            else geometric_scales(4, 14)
    table: list[tuple[float, float]] = []
    for t in scales:
        x, y = a.evaluate(t), b.evaluate(t)
        d_out = float(np.linalg.norm(x - y))
        if d_out <= DEGENERATE_DISTANCE:
            continue
        d_inn = inner_distance(
            germ, x, y, t,
            method=method,
            resolution_divisor=resolution_divisor,
            x_sheet=a.sheet,
            y_sheet=b.sheet,
        )
        table.append((t, d_inn / d_out))
    max_ratio = max((r for _, r in table), default=0.0)
    return LipschitzProbe(
        k=float(k),
        passed=max_ratio <= float(k),
        max_ratio=max_ratio,
        table=tuple(table),
    )


def ultrametric_check(a: Arc, b: Arc, c: Arc) -> UltrametricReport:
    """The two smallest of the three pairwise contact orders must agree."""
    orders = sorted(
        (
            outer_contact_order(a, b),
            outer_contact_order(b, c),
            outer_contact_order(a, c),
        ),
        key=lambda o: o.sort_key,
    )
    triple = (orders[0], orders[1], orders[2])
    if not all(o.is_finite for o in triple):
        return UltrametricReport(
            holds=None,
            orders=triple,
            note="some pairwise order is truncation-limited",
        )
    return UltrametricReport(holds=orders[0].value == orders[1].value,
                             orders=triple)


def tangency_scatter(
    germ: GermModel,
    scales=None,
    pairs_per_scale: int = 16,
    seed: int = 0,
    *,
    method: str = "auto",
    resolution_divisor: int = 64,
) -> ScatterReport:
    """Random matched-radius point pairs, outer vs inner distance.

    Pair configurations are drawn once and replayed at every scale (only
    the radius changes), so each pair traces a clean power law and the
    per-scale max ratio is monotone in t when the germ has a genuine
    bottleneck.  Half the pairs replay one parameter draw on two different
    sheets, which plants mirror-image configurations; those are exactly
    the pairs that pinch together in the outer metric on germs like cusps.
    ``tangent`` means the max d_inn/d_out ratio grows without bound as the
    scale shrinks, at fitted rate below the -0.1 slope threshold.
    """
    if pairs_per_scale < 16:
        raise ValueError("pairs_per_scale must be at least 16")
    if scales is None:
        scales = geometric_scales()
    scales = tuple(float(t) for t in scales)
    rng = random.Random(seed)
    n_sheets = len(germ.sheets)
    configs = []
    for i in range(pairs_per_scale):
        sheet_a = rng.randrange(n_sheets)
        if i % 2 == 1 and n_sheets > 1:
            # Mirrored pair: same point draw on a different sheet; cycle
            # through offsets so every sheet pairing gets exercised.
            offset = 1 + (i // 2) % (n_sheets - 1)
            sheet_b = (sheet_a + offset) % n_sheets
            seed_a = seed_b = rng.randrange(2**63)
        else:
            sheet_b = rng.randrange(n_sheets)
            seed_a = rng.randrange(2**63)
            seed_b = rng.randrange(2**63)
        configs.append((sheet_a, seed_a, sheet_b, seed_b))
    rows: list[tuple[float, float, float]] = []
    per_scale: list[tuple[float, float]] = []
    for t in scales:
        best = 0.0
        for sheet_a, seed_a, sheet_b, seed_b in configs:
            x = point_at_radius(germ, sheet_a, t, random.Random(seed_a))
            y = point_at_radius(germ, sheet_b, t, random.Random(seed_b))
            d_out = float(np.linalg.norm(x - y))
            d_inn = inner_distance(
                germ, x, y, t,
                method=method,
                resolution_divisor=resolution_divisor,
                x_sheet=sheet_a,
                y_sheet=sheet_b,
            )
            rows.append((t, d_out, d_inn))
            if d_out > DEGENERATE_DISTANCE:
                best = max(best, d_inn / d_out)
        if best > 0.0:
            per_scale.append((t, best))
    if len(per_scale) >= 4:
        slope, _ = loglog_slope([t for t, _ in per_scale],
                                [r for _, r in per_scale])
    else:
        slope = math.nan
    tangent = bool(slope <= TANGENCY_SLOPE) if not math.isnan(slope) else False
    return ScatterReport(
        rows=tuple(rows),
        max_ratio_per_scale=tuple(per_scale),
        ratio_slope=slope,
        tangent=tangent,
        pairs_per_scale=pairs_per_scale,
        seed=seed,
    )


def verdict(
    germ: GermModel,
    arc_budget: int = 8,
    seed: int = 0,
    scales=None,
    *,
    method: str = "auto",
    pairs_per_scale: int = 16,
) -> Verdict:
    """Search sampled arc pairs for an order mismatch.

    A witness is only declared when the independent tangency detector
    agrees that the inner/outer ratio blows up, guarding against fit
    artifacts.  The result is deterministic under (seed, budget) and is
    never phrased as a proof of normal embedding: sampling cannot exhaust
    all arc pairs.
    """
    if arc_budget < 2:
        raise ValueError("arc budget must be at least 2")
    arcs = sample_arcs(germ, arc_budget, seed)
    reports: list[CriterionReport] = []
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            reports.append(
                compare_orders(germ, arcs[i], arcs[j], scales, method=method)
            )
    scatter = tangency_scatter(
        germ, scales, pairs_per_scale=pairs_per_scale, seed=seed + 1,
        method=method,
    )
    notes: list[str] = []
    witness = next((r for r in reports if r.equal == "witness"), None)
    if witness is not None and not scatter.tangent:
        notes.append(
            f"order witness on pair {witness.pair} not confirmed by the "
            "tangency detector; reporting no witness"
        )
        witness = None
    ratio_by_scale: dict[float, float] = {}
    for report in reports:
        for t, d_out, d_inn in report.table:
            if d_out > DEGENERATE_DISTANCE and d_inn > DEGENERATE_DISTANCE:
                key = float(t)
                ratio_by_scale[key] = max(
                    ratio_by_scale.get(key, 0.0), d_inn / d_out
                )
    for t, r in scatter.max_ratio_per_scale:
        ratio_by_scale[float(t)] = max(ratio_by_scale.get(float(t), 0.0), r)
    max_ratio_per_scale = tuple(
        sorted(ratio_by_scale.items(), key=lambda kv: -kv[0])
    )
    gaps = [
        float(r.outer_order.value - r.inner_order.snapped)
        for r in reports
        if r.outer_order.is_finite and r.inner_order.snapped is not None
    ]
    return Verdict(
        germ_name=germ.name,
        outcome="NotNormallyEmbedded" if witness is not None
        else "NoWitnessFound",
        witness=witness,
        budget=arc_budget,
        seed=seed,
        arcs_sampled=len(arcs),
        pairs_tested=len(reports),
        inconclusive_pairs=tuple(
            r.pair for r in reports if r.equal == "inconclusive"
        ),
        max_ratio_per_scale=max_ratio_per_scale,
        min_order_gap=min(gaps) if gaps else None,
        scatter=scatter,
        notes=tuple(notes),
    )


# -- serialization -----------------------------------------------------------


def _order_to_json(order: ContactOrder):
    return {
        "finite": order.is_finite,
        "value": [order.value.numerator, order.value.denominator],
        "display": str(order),
    }


def _estimate_to_json(est: InnerOrderEstimate) -> dict:
    return {
        "slope": None if math.isnan(est.slope) else est.slope,
        "snapped": None if est.snapped is None
        else [est.snapped.numerator, est.snapped.denominator],
        "r_squared": est.r_squared,
        "degenerate": est.degenerate,
        "samples": [[t, d] for t, d in est.samples],
    }


def report_to_json(report: CriterionReport) -> dict:
    return {
        "pair": list(report.pair),
        "outer_order": _order_to_json(report.outer_order),
        "inner_order": _estimate_to_json(report.inner_order),
        "equal": report.equal,
        "ratio_exponent": None if math.isnan(report.ratio_exponent)
        else report.ratio_exponent,
        "table": [[t, d_out, d_inn] for t, d_out, d_inn in report.table],
        "arcs": [serialize_arc(a) for a in report.arcs],
        "notes": list(report.notes),
    }


def scatter_to_json(scatter: ScatterReport) -> dict:
    return {
        "pairs_per_scale": scatter.pairs_per_scale,
        "seed": scatter.seed,
        "ratio_slope": None if math.isnan(scatter.ratio_slope)
        else scatter.ratio_slope,
        "tangent": scatter.tangent,
        "max_ratio_per_scale": [[t, r] for t, r in scatter.max_ratio_per_scale],
        "rows": [[t, d_out, d_inn] for t, d_out, d_inn in scatter.rows],
    }


def verdict_to_json(v: Verdict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "verdict",
        "germ": v.germ_name,
        "outcome": v.outcome,
        "budget": v.budget,
        "seed": v.seed,
        "arcs_sampled": v.arcs_sampled,
        "pairs_tested": v.pairs_tested,
        "witness": None if v.witness is None else report_to_json(v.witness),
        "inconclusive_pairs": [list(p) for p in v.inconclusive_pairs],
        "max_ratio_per_scale": [[t, r] for t, r in v.max_ratio_per_scale],
        "min_order_gap": v.min_order_gap,
        "scatter": scatter_to_json(v.scatter),
        "notes": list(v.notes),
    }


def verdict_json_text(v: Verdict) -> str:
    """Byte-stable rendering: sorted keys, fixed indentation."""
    return json.dumps(verdict_to_json(v), sort_keys=True, indent=2) + "\n"


def distance_table_csv(report: CriterionReport) -> str:
    lines = ["t,d_outer,d_inner,ratio"]
    for t, d_out, d_inn in report.table:
        ratio = d_inn / d_out if d_out > DEGENERATE_DISTANCE else math.nan
        lines.append(f"{t!r},{d_out!r},{d_inn!r},{ratio!r}")
    return "\n".join(lines) + "\n"


def scatter_csv(scatter: ScatterReport) -> str:
    lines = ["t,d_outer,d_inner"]
    for t, d_out, d_inn in scatter.rows:
        lines.append(f"{t!r},{d_out!r},{d_inn!r}")
    return "\n".join(lines) + "\n"
