"""Arcs: vectors of Puiseux series through the origin.

The central exact quantity is the contact order of two arcs parametrized by
distance to the origin: half the vanishing order of the squared difference.
That computation never leaves rational arithmetic.  Reparametrization by
distance does take a square root of the squared norm, so it requires the
leading coefficient to be a perfect rational power; arcs produced by the
samplers in this package satisfy that by construction.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .fit import geometric_scales, golden_section_min, loglog_slope, snap_to_rational
from .puiseux import (
    DEFAULT_MAX_RAMIFICATION,
    DEFAULT_TRUNCATION,
    ContactOrder,
    ExactnessError,
    PuiseuxSeries,
    Rational,
    _frac,
    usable_radius,
)

# Order fits evaluate arcs at t <= 2^-4; a truncated series is only trusted
# well below the scale where a later term overtakes an earlier one, so
# samplers reject arcs whose crossover radius falls under this.  Probes past
# the radius (bracketing searches reach up to 1/2) only ever overshoot the
# true distance, because the overgrown tail inflates the norm.
MIN_ARC_RADIUS = 0.25


class ReparametrizationError(ExactnessError):
    """The arc admits no exact rational distance parametrization."""


class FitError(RuntimeError):
    """A numeric exponent fit failed to produce a usable value."""


@dataclass(frozen=True)
class Arc:
    """A parametrized arc through the origin of R^n.

    ``distance_parametrized`` asserts that the Euclidean norm of the arc
    equals t through the truncation window; the constructor verifies this.
    ``sheet`` optionally records which sheet of a germ the arc came from,
    as a hint for inner-distance queries.
    """

    components: tuple[PuiseuxSeries, ...]
    distance_parametrized: bool = False
    label: str | None = None
    sheet: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.components:
            raise ValueError("an arc needs at least one component")
        for i, comp in enumerate(self.components):
            o = comp.order()
            if o.is_finite and o.value <= 0:
                raise ValueError(f"component {i} does not vanish at t=0")
        if self.distance_parametrized:
            err = squared_norm(self) - PuiseuxSeries.monomial(
                2, 1, min(c.truncation for c in self.components) + 1
            )
            o = err.order()
            if o.is_finite and o.value <= 2:
                raise ValueError(
                    "distance_parametrized is set but |arc(t)| differs from t "
                    f"at order {o.value - 1}"
                )

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def truncation(self) -> Fraction:
        return min(c.truncation for c in self.components)

    def evaluate(self, t: float) -> np.ndarray:
        return np.array([c.evaluate(t) for c in self.components], dtype=float)

    def __str__(self) -> str:
        return "(" + ", ".join(repr(c) for c in self.components) + ")"


def squared_norm(arc: Arc) -> PuiseuxSeries:
    """Sum of squared components; exact."""
    acc: PuiseuxSeries | None = None
    for comp in arc.components:
        sq = comp * comp
        acc = sq if acc is None else acc + sq
    assert acc is not None
    return acc


def norm_series(arc: Arc, *, max_denominator: int = DEFAULT_MAX_RAMIFICATION) -> PuiseuxSeries:
    """The Euclidean norm |arc(t)| as a series; needs an exact square root."""
    return squared_norm(arc).sqrt(max_denominator=max_denominator)


def reparametrize_by_distance(
    arc: Arc, *, max_denominator: int = DEFAULT_MAX_RAMIFICATION
) -> Arc:
    """Rewrite the arc so that |arc(t)| == t up to truncation.

    Steps: rescale exponents so the norm has order one, take the norm's
    square root, invert it, and compose.  Each step is exact; if the squared
    norm's leading coefficient is not a perfect rational square (or, with
    fractional exponents present, a perfect higher power), raises
    ReparametrizationError with a hint.
    """
    if arc.distance_parametrized:
        return arc
    sq = squared_norm(arc)
    if sq.is_zero:
        raise ValueError("cannot reparametrize the zero arc")
    mu = sq.terms[0][0]  # twice the norm's vanishing order
    comps = arc.components
    if mu != 2:
        scale = 2 / mu
        comps = tuple(
            c.scale_exponents(scale, max_denominator=max_denominator) for c in comps
        )
        sq = sq.scale_exponents(scale, max_denominator=max_denominator)
    try:
        nrm = sq.sqrt(max_denominator=max_denominator)
        inv = nrm.compositional_inverse(max_denominator=max_denominator)
        new_comps = tuple(
            c.compose(inv, max_denominator=max_denominator) for c in comps
        )
    except ExactnessError as exc:
        raise ReparametrizationError(
            f"no exact rational distance parametrization: {exc}"
        ) from exc
    return Arc(
        new_comps,
        distance_parametrized=True,
        label=arc.label,
        sheet=arc.sheet,
    )


def outer_contact_order(a: Arc, b: Arc) -> ContactOrder:
    """Vanishing order of |a(t) - b(t)| with both arcs distance parametrized.

    Computed as half the order of the squared difference, so the result is
    exact whenever the series are; identical arcs yield a truncation bound.
    """
    a = reparametrize_by_distance(a)
    b = reparametrize_by_distance(b)
    if a.dim != b.dim:
        raise ValueError("arcs live in different ambient dimensions")
    acc: PuiseuxSeries | None = None
    for ca, cb in zip(a.components, b.components):
        d = ca - cb
        sq = d * d
        acc = sq if acc is None else acc + sq
    assert acc is not None
    o = acc.order()
    if o.is_finite:
        return ContactOrder.finite(o.value / 2)
    return ContactOrder.at_least(o.value / 2)


def outer_point_to_arc_order(
    a: Arc,
    b: Arc,
    *,
    scales: Sequence[float] | None = None,
    snap_denominator: int = 12,
    snap_tolerance: float = 0.05,
) -> ContactOrder:
    """Order of the Euclidean distance from a(t) to the arc b, numerically.

    At each scale the distance to b is minimized with golden section over the
    arc parameter; the order is the snapped log-log slope.  Raises FitError
    when the slope does not snap to a small rational.
    """
    a = reparametrize_by_distance(a)
    if scales is None:
        scales = geometric_scales(4, 15)
    dists: list[float] = []
    kept: list[float] = []
    for t in scales:
        p = a.evaluate(t)

        def gap(s: float, p=p) -> float:
            q = b.evaluate(s)
            return float(np.linalg.norm(p - q))

        _, best = golden_section_min(gap, t / 8.0, 8.0 * t, tol=1e-13)
        best = min(best, gap(0.0))
        if best > 1e-13:
            kept.append(t)
            dists.append(best)
    if len(kept) < 4:
        return ContactOrder.at_least(min(a.truncation, b.truncation))
    slope, r2 = loglog_slope(kept, dists)
    snapped = snap_to_rational(slope, snap_denominator, snap_tolerance)
    if snapped is None or r2 < 0.99:
        raise FitError(
            f"point-to-arc slope {slope:.4f} (R^2={r2:.4f}) does not snap to a "
            f"rational with denominator <= {snap_denominator}"
        )
    return ContactOrder.finite(snapped)


# -- rational direction sampling ------------------------------------------


def rational_unit_vector(rng: random.Random, dim: int) -> tuple[Fraction, ...]:
    """A random rational point on the unit sphere of R^dim.

    Stereographic image of a rational point, so the Euclidean norm is exactly
    one; coordinates are shuffled and sign-flipped for coverage.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim == 1:
        return (Fraction(rng.choice((-1, 1))),)
    # Small numerators keep the stereographic denominator 1 + |u|^2 modest;
    # direction coordinates feed exact compositions whose coefficient sizes
    # grow with powers of these denominators.
    u = [
        Fraction(rng.randint(-4, 4), rng.randint(1, 2))
        for _ in range(dim - 1)
    ]
    s = sum(x * x for x in u)
    denom = 1 + s
    vec = [2 * x / denom for x in u] + [(1 - s) / denom]
    rng.shuffle(vec)
    return tuple(-x if rng.random() < 0.5 else x for x in vec)


def random_arcs(
    dim: int,
    count: int,
    seed: int = 0,
    *,
    # Random pairs meet at small contact orders, so a short tail suffices;
    # every extra half-step slot slows the exact inversion noticeably.
    truncation: Rational = Fraction(6),
    direction_pool: int = 3,
    # Half-integer steps keep the ramification at 2; quarter-integer grids
    # double the term count and drive exact inversion cost up sharply.
    exponent_grid: Sequence[Rational] = (
        Fraction(3, 2),
        Fraction(2),
        Fraction(5, 2),
        Fraction(3),
    ),
) -> list[Arc]:
    """Distinct random distance-parametrized arcs in R^dim.

    Directions come from a small pool of rational unit vectors so that
    sampled arcs collide at leading order often enough to produce varied
    contact orders.  All arcs stay exactly rational.
    """
    trunc = _frac(truncation)
    rng = random.Random(seed)
    pool = [rational_unit_vector(rng, dim) for _ in range(max(1, direction_pool))]
    # Quarter-step perturbations in [-1, 1]: the norm's cross term doubles
    # the coefficient, and anything much above 1 at a small exponent gap
    # fails the conditioning screen below.
    perturb_pool = [
        tuple(Fraction(rng.randint(-4, 4), 4) for _ in range(dim))
        for _ in range(max(2, direction_pool))
    ]
    out: list[Arc] = []
    seen_raw: set[tuple] = set()
    seen: set[tuple] = set()
    attempts = 0
    while len(out) < count and attempts < 80 * count:
        attempts += 1
        direction = rng.choice(pool)
        comps = [
            PuiseuxSeries.monomial(1, d, trunc) if d else PuiseuxSeries.zero(trunc)
            for d in direction
        ]
        for _ in range(rng.randint(0, 2)):
            e = _frac(rng.choice(list(exponent_grid)))
            vec = rng.choice(perturb_pool)
            comps = [
                c + PuiseuxSeries.monomial(e, v, trunc) if v else c
                for c, v in zip(comps, vec)
            ]
        raw_key = tuple(c.terms for c in comps)
        if raw_key in seen_raw:
            continue
        seen_raw.add(raw_key)
        try:
            raw = Arc(tuple(comps))
            # Ill-conditioned norms invert with geometrically growing
            # coefficients; skip those before paying for exact inversion.
            if usable_radius(squared_norm(raw)) < 0.5 * MIN_ARC_RADIUS:
                continue
            arc = reparametrize_by_distance(raw)
        except (ReparametrizationError, ValueError):
            continue
        if any(usable_radius(c) < MIN_ARC_RADIUS for c in arc.components):
            continue
        key = tuple(c.terms for c in arc.components)
        if key in seen:
            continue
        seen.add(key)
        out.append(replace(arc, label=f"r{len(out)}"))
    if len(out) < count:
        raise RuntimeError(
            f"could only build {len(out)} distinct arcs out of {count} requested"
        )
    return out
