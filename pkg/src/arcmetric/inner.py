"""Inner metric, realized two ways.

For germs with a pancake decomposition the inner distance is the chain
metric: the shortest broken path whose links stay inside single pancakes
and whose corners lie on pancake junctions.  Without a decomposition we
fall back to graph geodesics on a point-cloud mesh.  Either backend feeds
the same multiscale log-log fit that turns distances into contact orders.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arcs import Arc, reparametrize_by_distance
from .fit import geometric_scales, golden_section_min, loglog_slope, snap_to_rational
from .germs import Adjacency, GermError, GermModel
from .mesh import MeshError, mesh_at_scale
from .puiseux import PuiseuxSeries

DEGENERATE_DISTANCE = 1e-13

# Chain corner optimization: passes of coordinate descent over junction
# parameters, stopping once a full pass improves the length by less than tol.
CHAIN_DESCENT_PASSES = 50
CHAIN_DESCENT_TOL = 1e-10


@dataclass(frozen=True)
class InnerOrderEstimate:
    """Fitted vanishing order of an inner distance as the scale shrinks.

    ``samples`` holds (t, distance) rows with t strictly decreasing.
    ``snapped`` is only set when the fit is trustworthy: R^2 at least 0.99
    and a rational with denominator <= the configured bound within the snap
    tolerance of the slope.  ``degenerate`` flags the all-distances-zero
    case (same arc twice), where no exponent is observable and the order is
    only known to exceed what the scales can see.
    """

    slope: float
    snapped: Fraction | None
    r_squared: float
    samples: tuple[tuple[float, float], ...]
    degenerate: bool = False

    def __str__(self) -> str:
        if self.degenerate:
            return "degenerate (distances below resolution at every scale)"
        snap = str(self.snapped) if self.snapped is not None else "no snap"
        return f"slope {self.slope:.4f} [{snap}], R^2 {self.r_squared:.4f}"


def _curve_point(curve: tuple[PuiseuxSeries, ...], s: float) -> np.ndarray:
    return np.array([c.evaluate(s) for c in curve], dtype=float)


def _curve_reach(curve: tuple[PuiseuxSeries, ...], target: float) -> float:
    """Parameter range on which the junction curve is worth searching."""
    s = 1e-8
    while s < 1.0 and float(np.linalg.norm(_curve_point(curve, s))) < target:
        s *= 2.0
    return min(s, 1.0)


def _min_on_curve(
    curve: tuple[PuiseuxSeries, ...],
    s_hi: float,
    objective,
) -> tuple[float, float]:
    """Coarse grid bracket followed by golden section; returns (s, value)."""
    grid = np.linspace(0.0, s_hi, 25)
    vals = [objective(float(s)) for s in grid]
    k = int(np.argmin(vals))
    lo = float(grid[max(0, k - 1)])
    hi = float(grid[min(len(grid) - 1, k + 1)])
    s_best, v_best = golden_section_min(objective, lo, hi, tol=1e-12)
    if vals[k] < v_best:
        return float(grid[k]), vals[k]
    return s_best, v_best


def _pancakes_of_point(
    germ: GermModel, x: np.ndarray, sheet_hint: int | None
) -> frozenset[int]:
    assert germ.pancakes is not None
    if sheet_hint is not None:
        return frozenset(germ.pancakes.containing(sheet_hint))
    hits: set[int] = set()
    for sheet_index in germ.locate_sheets(x):
        hits.update(germ.pancakes.containing(sheet_index))
    return frozenset(hits)


def _junction_table(germ: GermModel) -> dict[frozenset[int], list[Adjacency]]:
    assert germ.pancakes is not None
    table: dict[frozenset[int], list[Adjacency]] = {}
    for adj in germ.pancakes.adjacencies:
        table.setdefault(frozenset(adj.pancakes), []).append(adj)
    return table


def _simple_paths(
    neighbors: dict[int, set[int]],
    starts: frozenset[int],
    goals: frozenset[int],
    max_nodes: int,
) -> list[tuple[int, ...]]:
    # Chains never need to continue past a pancake that already contains the
    # endpoint: the direct closing link is no longer than any detour.
    paths: list[tuple[int, ...]] = []

    def walk(node: int, seen: set[int], path: list[int]) -> None:
        if node in goals:
            paths.append(tuple(path))
            return
        if len(path) >= max_nodes:
            return
        for nxt in sorted(neighbors.get(node, ())):
            if nxt not in seen:
                walk(nxt, seen | {nxt}, path + [nxt])

    for s in sorted(starts):
        walk(s, {s}, [s])
    return paths


def _chain_length(
    x: np.ndarray,
    y: np.ndarray,
    junctions: list[Adjacency],
) -> float:
    """Shortest broken path x -> junction points -> y.

    Origin-only junctions pin their corner at 0; curve junctions get their
    parameter optimized by coordinate descent, one corner at a time.
    """
    dim = len(x)
    origin = np.zeros(dim)
    params: list[float | None] = []
    reach = 2.0 * (float(np.linalg.norm(x)) + float(np.linalg.norm(y))) + 1e-12
    spans: list[float] = []
    for adj in junctions:
        if adj.curve is None:
            params.append(None)
            spans.append(0.0)
        else:
            params.append(0.0)
            spans.append(_curve_reach(adj.curve, reach))

    def corner(i: int) -> np.ndarray:
        if i < 0:
            return x
        if i >= len(junctions):
            return y
        adj = junctions[i]
        if adj.curve is None:
            return origin
        return _curve_point(adj.curve, params[i])

    def total() -> float:
        pts = [corner(i) for i in range(-1, len(junctions) + 1)]
        return float(sum(np.linalg.norm(p - q) for p, q in zip(pts, pts[1:])))

    movable = [i for i, adj in enumerate(junctions) if adj.curve is not None]
    if not movable:
        return total()
    best = total()
    for _ in range(CHAIN_DESCENT_PASSES):
        for i in movable:
            prev_pt = corner(i - 1)
            next_pt = corner(i + 1)
            curve = junctions[i].curve
            assert curve is not None

            def leg(s: float) -> float:
                c = _curve_point(curve, s)
                return float(
                    np.linalg.norm(prev_pt - c) + np.linalg.norm(c - next_pt)
                )

            params[i], _ = _min_on_curve(curve, spans[i], leg)
        now = total()
        if best - now < CHAIN_DESCENT_TOL:
            best = min(best, now)
            break
        best = now
    return best


def pancake_distance(
    germ: GermModel,
    x: np.ndarray,
    y: np.ndarray,
    x_sheet: int | None = None,
    y_sheet: int | None = None,
) -> float:
    """Chain metric between two germ points.

    Equals the Euclidean distance when the points share a pancake, and never
    drops below it (every chain is a broken path).  Sheet hints skip the
    numeric point-location step, which both speeds things up and avoids
    misattribution when sheets pass close to each other.
    """
    if germ.pancakes is None:
        raise GermError(f"germ {germ.name} carries no pancake decomposition")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    px = _pancakes_of_point(germ, x, x_sheet)
    py = _pancakes_of_point(germ, y, y_sheet)
    direct = float(np.linalg.norm(x - y))
    if px & py:
        return direct
    neighbors: dict[int, set[int]] = {}
    table = _junction_table(germ)
    for pair in table:
        a, b = tuple(pair)
        neighbors.setdefault(a, set()).add(b)
        neighbors.setdefault(b, set()).add(a)
    paths = _simple_paths(neighbors, px, py, len(germ.pancakes.groups))
    if not paths:
        raise GermError(
            f"no pancake chain connects the given points on {germ.name}"
        )
    best = math.inf
    for path in paths:
        link_options = [table[frozenset(edge)] for edge in zip(path, path[1:])]
        for junctions in itertools.product(*link_options):
            best = min(best, _chain_length(x, y, list(junctions)))
    return best


# -- multiscale order estimation --------------------------------------------


def _fit_estimate(
    samples: list[tuple[float, float]],
    snap_denominator: int,
    snap_tolerance: float,
) -> InnerOrderEstimate:
    kept = [(t, d) for t, d in samples if d > DEGENERATE_DISTANCE]
    if len(kept) < 4:
        return InnerOrderEstimate(
            slope=math.nan,
            snapped=None,
            r_squared=0.0,
            samples=tuple(samples),
            degenerate=True,
        )
    slope, r2 = loglog_slope([t for t, _ in kept], [d for _, d in kept])
    snapped = snap_to_rational(slope, snap_denominator, snap_tolerance)
    if r2 < 0.99:
        snapped = None
    return InnerOrderEstimate(
        slope=slope,
        snapped=snapped,
        r_squared=r2,
        samples=tuple(samples),
    )


def _use_pancakes(germ: GermModel, method: str) -> bool:
    if method == "pancake":
        if germ.pancakes is None:
            raise GermError(f"germ {germ.name} carries no pancake decomposition")
        return True
    if method == "mesh":
        return False
    if method == "auto":
        return germ.pancakes is not None
    raise ValueError(f"unknown inner-distance method {method!r}")


def _validate_scales(scales) -> tuple[float, ...]:
    out = tuple(float(t) for t in scales)
    if len(out) < 5:
        raise ValueError("need at least five scales for a trustworthy fit")
    if any(t2 >= t1 for t1, t2 in zip(out, out[1:])):
        raise ValueError("scales must be strictly decreasing")
    return out


def inner_distance(
    germ: GermModel,
    x: np.ndarray,
    y: np.ndarray,
    t: float,
    *,
    method: str = "auto",
    resolution_divisor: int = 64,
    x_sheet: int | None = None,
    y_sheet: int | None = None,
) -> float:
    """Inner distance at working scale t through the configured backend."""
    if _use_pancakes(germ, method):
        return pancake_distance(germ, x, y, x_sheet=x_sheet, y_sheet=y_sheet)
    mesh = mesh_at_scale(germ, t, t / resolution_divisor)
    return mesh.distance(x, y)


def inner_contact_order(
    germ: GermModel,
    a: Arc,
    b: Arc,
    scales=None,
    *,
    method: str = "auto",
    resolution_divisor: int = 64,
    snap_denominator: int = 12,
    snap_tolerance: float = 0.05,
) -> InnerOrderEstimate:
    """Vanishing order of the inner distance between two arcs.

    Both arcs are brought to distance parametrization, the inner distance
    between matched points a(t), b(t) is measured across the scale sweep,
    and the log-log slope is fitted and snapped.
    """
    a = reparametrize_by_distance(a)
    b = reparametrize_by_distance(b)
    ts = _validate_scales(scales if scales is not None else geometric_scales())
    samples = []
    for t in ts:
        d = inner_distance(
            germ,
            a.evaluate(t),
            b.evaluate(t),
            t,
            method=method,
            resolution_divisor=resolution_divisor,
            x_sheet=a.sheet,
            y_sheet=b.sheet,
        )
        samples.append((t, d))
    return _fit_estimate(samples, snap_denominator, snap_tolerance)


def inner_point_to_arc_order(
    germ: GermModel,
    a: Arc,
    b: Arc,
    scales=None,
    *,
    method: str = "auto",
    resolution_divisor: int = 64,
    snap_denominator: int = 12,
    snap_tolerance: float = 0.05,
    grid_size: int = 48,
) -> InnerOrderEstimate:
    """Order of the inner distance from a(t) to the whole arc b.

    Per scale the distance is minimized over a geometric parameter grid on
    b (plus the origin); the grid is relative to the scale, so the bounded
    relative error of the grid minimum cannot tilt the fitted slope.
    """
    a = reparametrize_by_distance(a)
    b = reparametrize_by_distance(b)
    ts = _validate_scales(scales if scales is not None else geometric_scales())
    use_pancakes = _use_pancakes(germ, method)
    samples = []
    for t in ts:
        x = a.evaluate(t)
        s_grid = [0.0, t] + [
            float(s) for s in np.geomspace(t / 16.0, 4.0 * t, grid_size)
        ]
        if use_pancakes:
            d = math.inf
            for s in s_grid:
                try:
                    d = min(d, pancake_distance(
                        germ, x, b.evaluate(s), x_sheet=a.sheet, y_sheet=b.sheet
                    ))
                except GermError:
                    continue  # truncated tail pushed the point off the germ
            if math.isinf(d):
                raise GermError(
                    f"no grid point of {b.label or 'arc'} lies on {germ.name}"
                )
        else:
            mesh = mesh_at_scale(germ, t, t / resolution_divisor)
            source = mesh.nearest_vertex(x)
            dist = mesh.distances_from(source)
            best = math.inf
            for s in s_grid:
                try:
                    v = mesh.nearest_vertex(b.evaluate(s))
                except MeshError:
                    continue  # grid point outside the mesh window
                best = min(best, float(dist[v]))
            d = best
        samples.append((t, d))
    return _fit_estimate(samples, snap_denominator, snap_tolerance)
