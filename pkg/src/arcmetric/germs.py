"""Semialgebraic germ models: parametrized sheets plus pancake structure.

A germ is a finite union of sheet images near the origin.  Sheets are maps
with one or two parameters; every component is a quotient of sums of
monomials with rational exponents, so substituting Puiseux series for the
parameters yields exact Puiseux arcs on the germ.

Pancakes group sheets into pieces on which the Euclidean distance is a
faithful stand-in for the inner distance; adjacency records where two
pancakes touch (a boundary curve, or just the origin).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .arcs import (
    MIN_ARC_RADIUS,
    Arc,
    ReparametrizationError,
    rational_unit_vector,
    reparametrize_by_distance,
    squared_norm,
)
from .puiseux import (
    DEFAULT_MAX_RAMIFICATION,
    DEFAULT_TRUNCATION,
    ExactnessError,
    PuiseuxSeries,
    RamificationError,
    Rational,
    _frac,
    inverse_unit,
    rational_nth_root,
    usable_radius,
)

Substitution = tuple[str, object]  # ("const", Fraction) or ("series", PuiseuxSeries)


class GermError(ValueError):
    """Bad germ construction or a point that does not lie on the germ."""


@dataclass(frozen=True)
class Monomial:
    """coeff * prod params[j] ** powers[j], powers rational and >= 0."""

    coeff: Fraction
    powers: tuple[Fraction, ...]

    def __post_init__(self):
        if any(p < 0 for p in self.powers):
            raise GermError("monomial powers must be nonnegative")

    def evaluate(self, params: Sequence[float]) -> float:
        if len(params) != len(self.powers):
            raise GermError("monomial parameter count mismatch")
        val = float(self.coeff)
        for base, power in zip(params, self.powers):
            if power == 0:
                continue
            if base < 0 and power.denominator != 1:
                raise GermError("fractional power of a negative parameter")
            val *= base ** float(power)
        return val

    def evaluate_many(self, params: np.ndarray) -> np.ndarray:
        if params.shape[1] != len(self.powers):
            raise GermError("monomial parameter count mismatch")
        val = np.full(len(params), float(self.coeff))
        for j, power in enumerate(self.powers):
            if power == 0:
                continue
            base = params[:, j]
            if power.denominator != 1 and np.any(base < 0):
                raise GermError("fractional power of a negative parameter")
            val = val * base ** float(power)
        return val

    def substitute(self, subs: Sequence[Substitution], truncation: Fraction,
                   max_denominator: int) -> PuiseuxSeries:
        scalar = self.coeff
        series = PuiseuxSeries.constant(1, truncation)
        nontrivial = False
        for (kind, value), power in zip(subs, self.powers):
            if power == 0:
                continue
            p, q = power.numerator, power.denominator
            if kind == "const":
                c = _frac(value)  # type: ignore[arg-type]
                if c == 0:
                    return PuiseuxSeries.zero(truncation)
                root = c if q == 1 else rational_nth_root(c, q)
                if root is None:
                    raise ExactnessError(
                        f"constant {c} has no rational {q}-th root"
                    )
                scalar *= root**p
            else:
                s: PuiseuxSeries = value  # type: ignore[assignment]
                if s.is_zero:
                    return PuiseuxSeries.zero(truncation)
                factor = s if power == 1 else s.nth_root(
                    q, max_denominator=max_denominator
                ).int_pow(p)
                series = series * factor
                nontrivial = True
        if not nontrivial:
            return PuiseuxSeries.constant(scalar, truncation)
        return series * scalar


@dataclass(frozen=True)
class RationalMap:
    """Quotient of two monomial sums; denominator defaults to 1.

    The denominator must have a nonzero value at the sheet origin so that
    substitution stays inside Puiseux series.
    """

    numerator: tuple[Monomial, ...]
    denominator: tuple[Monomial, ...] = ()

    def evaluate(self, params: Sequence[float]) -> float:
        num = sum(m.evaluate(params) for m in self.numerator)
        if not self.denominator:
            return float(num)
        den = sum(m.evaluate(params) for m in self.denominator)
        return float(num) / float(den)

    def evaluate_many(self, params: np.ndarray) -> np.ndarray:
        num = np.zeros(len(params))
        for m in self.numerator:
            num = num + m.evaluate_many(params)
        if not self.denominator:
            return num
        den = np.zeros(len(params))
        for m in self.denominator:
            den = den + m.evaluate_many(params)
        return num / den

    def substitute(self, subs: Sequence[Substitution], truncation: Fraction,
                   max_denominator: int) -> PuiseuxSeries:
        acc = PuiseuxSeries.zero(truncation)
        for m in self.numerator:
            acc = acc + m.substitute(subs, truncation, max_denominator)
        if not self.denominator:
            return acc
        den = PuiseuxSeries.zero(truncation)
        for m in self.denominator:
            den = den + m.substitute(subs, truncation, max_denominator)
        return acc * inverse_unit(den)


@dataclass(frozen=True)
class Sheet:
    """A parametrized piece of the germ.

    ``bounds`` is one (lo, hi) interval per parameter; ``angular`` marks
    parameters that may stay constant along an arc (directions around a
    cross-section) as opposed to radial ones that must shrink to zero.
    """

    components: tuple[RationalMap, ...]
    bounds: tuple[tuple[Fraction, Fraction], ...]
    angular: tuple[bool, ...]

    def __post_init__(self):
        if len(self.bounds) not in (1, 2):
            raise GermError("sheets have one or two parameters")
        if len(self.angular) != len(self.bounds):
            raise GermError("angular flags must match parameter count")
        if all(self.angular):
            raise GermError("a sheet needs at least one radial parameter")
        for lo, hi in self.bounds:
            if not lo < hi:
                raise GermError("empty parameter interval")

    @property
    def param_dim(self) -> int:
        return len(self.bounds)

    def evaluate(self, params: Sequence[float]) -> np.ndarray:
        return np.array([c.evaluate(params) for c in self.components], dtype=float)

    def evaluate_many(self, params: np.ndarray) -> np.ndarray:
        """Row-wise evaluation: params (N, param_dim) -> points (N, ambient)."""
        params = np.asarray(params, dtype=float)
        return np.column_stack([c.evaluate_many(params) for c in self.components])

    def substitute(self, subs: Sequence[Substitution],
                   truncation: Fraction = DEFAULT_TRUNCATION,
                   max_denominator: int = DEFAULT_MAX_RAMIFICATION,
                   ) -> tuple[PuiseuxSeries, ...]:
        if len(subs) != self.param_dim:
            raise GermError("substitution arity mismatch")
        return tuple(
            c.substitute(subs, _frac(truncation), max_denominator)
            for c in self.components
        )


@dataclass(frozen=True)
class Adjacency:
    """Where two pancakes meet: a curve through the origin, or the origin only."""

    pancakes: tuple[int, int]
    curve: tuple[PuiseuxSeries, ...] | None = None  # None: meet at origin only


@dataclass(frozen=True)
class PancakeDecomposition:
    groups: tuple[tuple[int, ...], ...]  # sheet indices per pancake
    adjacencies: tuple[Adjacency, ...] = ()

    def containing(self, sheet_index: int) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.groups) if sheet_index in g)


class GermModel:
    """A germ: named union of sheets with optional pancake structure.

    ``residual`` is an implicit-form defect function (0 on the germ) used for
    on-germ validation of builtin families; germs loaded from spec files may
    not have one.  ``residual_series`` is the same defect in exact series
    form: it maps arc components to series that must all vanish identically,
    which validates sampled arcs with no numerical threshold at all.
    Equality is structural and ignores both residual forms.
    """

    def __init__(
        self,
        name: str,
        ambient_dim: int,
        sheets: Sequence[Sheet],
        pancakes: PancakeDecomposition | None = None,
        radius: Rational = Fraction(1, 2),
        residual: Callable[[np.ndarray], float] | None = None,
        residual_series: Callable[
            [Sequence[PuiseuxSeries]], Sequence[PuiseuxSeries]
        ] | None = None,
    ):
        if ambient_dim < 1:
            raise GermError("ambient dimension must be positive")
        for s in sheets:
            if len(s.components) != ambient_dim:
                raise GermError("sheet component count != ambient dimension")
        if pancakes is not None:
            used = {i for g in pancakes.groups for i in g}
            if used != set(range(len(sheets))):
                raise GermError("pancakes must cover exactly the sheet indices")
            for adj in pancakes.adjacencies:
                a, b = adj.pancakes
                n = len(pancakes.groups)
                if not (0 <= a < n and 0 <= b < n) or a == b:
                    raise GermError("bad adjacency pancake pair")
                if adj.curve is not None and len(adj.curve) != ambient_dim:
                    raise GermError("adjacency curve dimension mismatch")
        self.name = name
        self.ambient_dim = int(ambient_dim)
        self.sheets = tuple(sheets)
        self.pancakes = pancakes
        self.radius = _frac(radius)
        self.residual = residual
        self.residual_series = residual_series
        self._mesh_cache: dict = {}

    def __eq__(self, other) -> bool:
        if not isinstance(other, GermModel):
            return NotImplemented
        return (
            self.ambient_dim == other.ambient_dim
            and self.sheets == other.sheets
            and self.pancakes == other.pancakes
            and self.radius == other.radius
        )

    def __repr__(self) -> str:
        return f"GermModel({self.name!r}, dim={self.ambient_dim}, sheets={len(self.sheets)})"

    # -- numeric helpers ---------------------------------------------------

    def locate_sheets(self, x: np.ndarray, tol: float | None = None) -> list[int]:
        """Sheets whose image passes within tol of x, best first."""
        x = np.asarray(x, dtype=float)
        scale = max(float(np.linalg.norm(x)), 1e-9)
        if tol is None:
            tol = 1e-5 * max(scale, 1e-3)
        dists = [
            (self._projection_distance(i, x), i) for i in range(len(self.sheets))
        ]
        dists.sort()
        best = dists[0][0]
        cut = max(tol, 4.0 * best + 1e-12)
        hit = [i for d, i in dists if d <= cut]
        if not hit or best > tol:
            raise GermError(
                f"point {x.tolist()} is not on germ {self.name} "
                f"(nearest sheet distance {best:.3e})"
            )
        return hit

    def _projection_distance(self, sheet_index: int, x: np.ndarray) -> float:
        from .fit import golden_section_min

        sheet = self.sheets[sheet_index]
        lob = [float(lo) for lo, _ in sheet.bounds]
        hib = [float(hi) for _, hi in sheet.bounds]
        if sheet.param_dim == 1:
            def fn(u: float) -> float:
                return float(np.linalg.norm(sheet.evaluate([u]) - x))

            _, d = golden_section_min(fn, lob[0], hib[0], tol=1e-12)
            return min(d, fn(lob[0]), fn(hib[0]))
        # 2 parameters: coarse grid then coordinate-wise golden refinement.
        # Radial axes get geometric points toward zero on top of the linear
        # grid: near the tip the linear rows collapse to the origin, where
        # the angular coordinate is unidentifiable and descent stalls.
        grid = 14

        def axis(j: int) -> np.ndarray:
            vals = np.linspace(lob[j], hib[j], grid)
            if sheet.angular[j] or not lob[j] <= 0.0 <= hib[j]:
                return vals
            span = hib[j] - lob[j]
            extra = []
            step = 0.5 * span
            while step > 1e-7 * span:
                if step <= hib[j]:
                    extra.append(step)
                if -step >= lob[j]:
                    extra.append(-step)
                step *= 0.5
            return np.unique(np.concatenate([vals, extra]))

        us = axis(0)
        vs = axis(1)
        best = (math.inf, 0.0, 0.0)
        for u in us:
            for v in vs:
                d = float(np.linalg.norm(sheet.evaluate([u, v]) - x))
                if d < best[0]:
                    best = (d, float(u), float(v))
        _, u0, v0 = best
        # Coordinate-wise descent stalls in the curved valley along the
        # tube direction; Powell handles the coupling.
        res = minimize(
            lambda p: float(np.linalg.norm(sheet.evaluate(list(p)) - x)),
            np.array([u0, v0]),
            method="Powell",
            bounds=[(lob[0], hib[0]), (lob[1], hib[1])],
            options={"xtol": 1e-12, "ftol": 1e-14, "maxiter": 200},
        )
        return float(res.fun)

    def on_germ(self, x: np.ndarray, tol: float = 1e-8) -> bool:
        if self.residual is not None:
            return abs(self.residual(np.asarray(x, dtype=float))) <= tol
        try:
            self.locate_sheets(x)
            return True
        except GermError:
            return False

    def mesh_at_scale(self, t: float, resolution: float):
        from .mesh import mesh_at_scale

        return mesh_at_scale(self, t, resolution)


# -- builtin families -------------------------------------------------------


def _mono(coeff: Rational, *powers: Rational) -> Monomial:
    return Monomial(_frac(coeff), tuple(_frac(p) for p in powers))


def _series_curve(dim: int, entries: dict[int, tuple[Rational, Rational]],
                  truncation: Rational = DEFAULT_TRUNCATION) -> tuple[PuiseuxSeries, ...]:
    """Curve components: entries maps coordinate -> (exponent, coeff)."""
    comps = []
    for i in range(dim):
        if i in entries:
            e, c = entries[i]
            comps.append(PuiseuxSeries.monomial(e, c, truncation))
        else:
            comps.append(PuiseuxSeries.zero(truncation))
    return tuple(comps)


def _builtin_cusp(p: int, q: int) -> GermModel:
    if p <= q or q < 1:
        raise GermError(f"cusp needs integer p > q >= 1, got ({p}, {q})")
    exponent = Fraction(p, q)
    sheets = []
    for sign in (1, -1):
        sheets.append(
            Sheet(
                components=(
                    RationalMap((_mono(sign, exponent),)),
                    RationalMap((_mono(1, 1),)),
                ),
                bounds=((Fraction(0), Fraction(1)),),
                angular=(False,),
            )
        )
    pancakes = PancakeDecomposition(
        groups=((0,), (1,)),
        adjacencies=(Adjacency((0, 1), None),),
    )

    def residual(x: np.ndarray) -> float:
        y = max(float(x[1]), 0.0)
        return abs(float(x[0])) ** q - y**p

    def residual_series(c: Sequence[PuiseuxSeries]) -> tuple[PuiseuxSeries, ...]:
        # Doubled powers absorb the sign of the mirrored branch.
        return (c[0].int_pow(2 * q) - c[1].int_pow(2 * p),)

    return GermModel(
        f"cusp({p},{q})", 2, sheets, pancakes,
        residual=residual, residual_series=residual_series,
    )


def _half_tube_sheets(radial_power: Fraction, slope: Fraction) -> list[Sheet]:
    """Two charts of {x^2 + y^2 = (slope * u^radial_power)^2} via the
    rational circle (1-v^2, 2v)/(1+v^2)."""
    circle_den = (_mono(1, 0, 0), _mono(1, 0, 2))
    sheets = []
    for flip in (1, -1):
        sheets.append(
            Sheet(
                components=(
                    RationalMap(
                        (_mono(flip * slope, radial_power, 0),
                         _mono(-flip * slope, radial_power, 2)),
                        circle_den,
                    ),
                    RationalMap((_mono(2 * slope, radial_power, 1),), circle_den),
                    RationalMap((_mono(1, 1, 0),)),
                ),
                bounds=((Fraction(0), Fraction(1)), (Fraction(-1), Fraction(1))),
                angular=(False, True),
            )
        )
    return sheets


def _builtin_horn(beta: Fraction) -> GermModel:
    if beta <= 1:
        raise GermError(f"horn exponent must exceed 1, got {beta}; use cone for 1")
    sheets = _half_tube_sheets(beta, Fraction(1))
    pancakes = PancakeDecomposition(groups=((0, 1),))
    two_beta = 2 * beta

    def residual(x: np.ndarray) -> float:
        z = float(x[2])
        if z < 0:
            return abs(z) + 1.0
        return float(x[0]) ** 2 + float(x[1]) ** 2 - z ** float(two_beta)

    def residual_series(c: Sequence[PuiseuxSeries]) -> tuple[PuiseuxSeries, ...]:
        # (x^2 + y^2)^q == z^(2p) keeps the identity polynomial for any
        # rational exponent beta == p/q.
        lhs = (c[0] * c[0] + c[1] * c[1]).int_pow(beta.denominator)
        return (lhs - c[2].int_pow(2 * beta.numerator),)

    return GermModel(
        f"horn({beta})", 3, sheets, pancakes,
        residual=residual, residual_series=residual_series,
    )


def _builtin_cone(slope: Fraction) -> GermModel:
    if slope <= 0:
        raise GermError(f"cone slope must be positive, got {slope}")
    sheets = _half_tube_sheets(Fraction(1), slope)
    pancakes = PancakeDecomposition(groups=((0, 1),))
    m2 = float(slope) ** 2

    def residual(x: np.ndarray) -> float:
        z = float(x[2])
        if z < 0:
            return abs(z) + 1.0
        return float(x[0]) ** 2 + float(x[1]) ** 2 - m2 * z**2

    def residual_series(c: Sequence[PuiseuxSeries]) -> tuple[PuiseuxSeries, ...]:
        return (c[0] * c[0] + c[1] * c[1] - c[2] * c[2] * (slope * slope),)

    return GermModel(
        f"cone({slope})", 3, sheets, pancakes,
        residual=residual, residual_series=residual_series,
    )


def _builtin_plane() -> GermModel:
    sheet = Sheet(
        components=(
            RationalMap((_mono(1, 1, 0),)),
            RationalMap((_mono(1, 0, 1),)),
            RationalMap(()),
        ),
        bounds=((Fraction(-1), Fraction(1)), (Fraction(-1), Fraction(1))),
        angular=(False, False),
    )
    pancakes = PancakeDecomposition(groups=((0,),))

    def residual(x: np.ndarray) -> float:
        return abs(float(x[2]))

    def residual_series(c: Sequence[PuiseuxSeries]) -> tuple[PuiseuxSeries, ...]:
        return (c[2],)

    return GermModel(
        "plane", 3, (sheet,), pancakes,
        residual=residual, residual_series=residual_series,
    )


def _builtin_complex_cusp() -> GermModel:
    # Image of w -> (w^2, w^3) over the complex disc, written in R^4 and cut
    # into the four quadrant sectors of the parameter disc; on a sector of
    # angle <= pi/2 squaring distorts distances only by bounded factors, so
    # each sector image is a pancake.
    # Base sector k=0: w = u + iv, u, v >= 0.
    A = (_mono(1, 2, 0), _mono(-1, 0, 2))        # Re w^2 = u^2 - v^2
    B = (_mono(2, 1, 1),)                        # Im w^2 = 2uv
    C = (_mono(1, 3, 0), _mono(-3, 1, 2))        # Re w^3 = u^3 - 3uv^2
    D = (_mono(3, 2, 1), _mono(-1, 0, 3))        # Im w^3 = 3u^2v - v^3
    zero = ()

    def neg(mons: tuple[Monomial, ...]) -> tuple[Monomial, ...]:
        return tuple(Monomial(-m.coeff, m.powers) for m in mons)

    # Sector k has w_k = i^k * w_0, so w_k^2 = (-1)^k w_0^2 and
    # w_k^3 = i^(3k) w_0^3.
    layouts = [
        (A, B, C, D),
        (neg(A), neg(B), D, neg(C)),
        (A, B, neg(C), neg(D)),
        (neg(A), neg(B), neg(D), C),
    ]
    sheets = []
    for comps in layouts:
        sheets.append(
            Sheet(
                components=tuple(RationalMap(c) for c in comps),
                bounds=((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1))),
                angular=(False, False),
            )
        )
    # Boundary ray of sectors k, k+1 is the w-ray along i^(k+1); its image is
    # rho -> (rho^2 * i^(2(k+1)), rho^3 * i^(3(k+1))).
    ray_curves = {
        1: _series_curve(4, {0: (2, -1), 3: (3, -1)}),
        2: _series_curve(4, {0: (2, 1), 2: (3, -1)}),
        3: _series_curve(4, {0: (2, -1), 3: (3, 1)}),
        0: _series_curve(4, {0: (2, 1), 2: (3, 1)}),
    }
    adjacencies = tuple(
        Adjacency((k, (k + 1) % 4), ray_curves[(k + 1) % 4]) for k in range(4)
    ) + (Adjacency((0, 2), None), Adjacency((1, 3), None))
    pancakes = PancakeDecomposition(
        groups=((0,), (1,), (2,), (3,)), adjacencies=adjacencies
    )

    def residual(x: np.ndarray) -> float:
        a = complex(float(x[0]), float(x[1]))
        b = complex(float(x[2]), float(x[3]))
        return abs(a**3 - b**2)

    def residual_series(c: Sequence[PuiseuxSeries]) -> tuple[PuiseuxSeries, ...]:
        x0, x1, x2, x3 = c
        real = x0.int_pow(3) - x0 * x1 * x1 * 3 - x2 * x2 + x3 * x3
        imag = x0 * x0 * x1 * 3 - x1.int_pow(3) - x2 * x3 * 2
        return (real, imag)

    return GermModel(
        "complex_cusp", 4, sheets, pancakes,
        residual=residual, residual_series=residual_series,
    )


def builtin(name: str, *params: Rational) -> GermModel:
    """Construct a builtin germ family member.

    Families: cusp(p, q), horn(beta), cone(slope), complex_cusp, plane.
    """
    key = name.strip().lower()
    if key == "cusp":
        if len(params) != 2:
            raise GermError("cusp takes two integer parameters p, q")
        p, q = (_frac(x) for x in params)
        if p.denominator != 1 or q.denominator != 1:
            raise GermError("cusp parameters must be integers")
        return _builtin_cusp(int(p), int(q))
    if key == "horn":
        if len(params) != 1:
            raise GermError("horn takes one rational parameter")
        return _builtin_horn(_frac(params[0]))
    if key == "cone":
        if len(params) > 1:
            raise GermError("cone takes at most one rational parameter")
        # Default slope 3/4: 1 + slope^2 = (5/4)^2, so distance
        # parametrizations of straight rays stay rational.
        return _builtin_cone(_frac(params[0]) if params else Fraction(3, 4))
    if key == "plane":
        if params:
            raise GermError("plane takes no parameters")
        return _builtin_plane()
    if key == "complex_cusp":
        if params:
            raise GermError("complex_cusp takes no parameters")
        return _builtin_complex_cusp()
    raise GermError(f"unknown builtin germ {name!r}")


# -- arc sampling -----------------------------------------------------------


@dataclass(frozen=True)
class SamplingStrategy:
    """Knobs for deterministic arc sampling on a germ."""

    exponent_grid: tuple[Fraction, ...] = (
        Fraction(1),
        Fraction(5, 4),
        Fraction(3, 2),
        Fraction(2),
        Fraction(5, 2),
        Fraction(3),
    )
    angular_constant_probability: float = 0.6
    truncation: Fraction = DEFAULT_TRUNCATION
    max_power_base: int = 4
    # Germs whose sheets carry one canonical arc each saturate early; this
    # many rounds with no new image means the family is exhausted.
    max_fruitless_rounds: int = 16


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _coefficient_power(sheet: Sheet, exponents: list[Fraction]) -> int:
    """lcm of root degrees the reparametrization may need for this draw."""
    L = 1
    for comp in sheet.components:
        for m in comp.numerator + comp.denominator:
            for p in m.powers:
                L = _lcm(L, p.denominator)
    e_min = min(exponents)
    for e in exponents:
        L = _lcm(L, (e / e_min).denominator)
    return L


def sample_arcs(
    germ: GermModel,
    count: int,
    seed: int = 0,
    strategy: SamplingStrategy | None = None,
) -> list[Arc]:
    """Deterministic distinct distance-parametrized arcs on the germ.

    ``count`` is a cap: on germs whose sheets carry a single arc each (the
    distance parametrization of a one-dimensional branch is canonical) the
    list is shorter.  Every arc is validated against the germ residual when
    one is available.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    strat = strategy or SamplingStrategy()
    out: list[Arc] = []
    attempts = 0
    last_failure: Exception | None = None
    last_progress_round = -1
    max_attempts = 220 * count + 80
    while len(out) < count and attempts < max_attempts:
        # One draw per round, replayed on every sheet: structurally equal
        # sheets then carry arcs with identical parameters, so mirror-image
        # pairs (the interesting contact configurations) appear in samples.
        round_index = attempts // len(germ.sheets)
        if round_index - last_progress_round > strat.max_fruitless_rounds:
            break
        sheet_index = attempts % len(germ.sheets)
        attempts += 1
        sheet = germ.sheets[sheet_index]
        rng = random.Random(seed * 1_000_003 + round_index)
        subs = _draw_substitution(sheet, rng, strat)
        if subs is None:
            continue
        try:
            comps = sheet.substitute(subs, strat.truncation)
            arc = Arc(comps, sheet=sheet_index)
            # Ill-conditioned norms invert with geometrically growing
            # coefficients; skip those before paying for exact inversion.
            if usable_radius(squared_norm(arc)) < 0.5 * MIN_ARC_RADIUS:
                last_failure = RuntimeError(
                    "draw rejected: norm series unusable at working scales"
                )
                continue
            arc = reparametrize_by_distance(arc)
        except (ReparametrizationError, ExactnessError, RamificationError, ValueError) as exc:
            last_failure = exc
            continue
        if any(usable_radius(c) < MIN_ARC_RADIUS for c in arc.components):
            last_failure = RuntimeError(
                "draw rejected: truncated series unusable at working scales"
            )
            continue
        # Distance parametrization is canonical per image, so agreement below
        # the common truncation means the same curve was drawn again.
        duplicate = any(
            all(
                ca.agrees_with(cb)
                for ca, cb in zip(arc.components, prev.components)
            )
            for prev in out
            if prev.dim == arc.dim
        )
        if duplicate:
            continue
        out.append(
            Arc(
                arc.components,
                distance_parametrized=True,
                label=f"{germ.name}#{len(out)}",
                sheet=sheet_index,
            )
        )
        last_progress_round = round_index
        _check_sampled_arc(germ, out[-1])
    if not out:
        hint = f" (last failure: {last_failure})" if last_failure else ""
        raise RuntimeError(f"could not sample any arc on {germ.name}{hint}")
    return out


def _draw_substitution(
    sheet: Sheet, rng: random.Random, strat: SamplingStrategy
) -> list[Substitution] | None:
    subs: list[Substitution | None] = [None] * sheet.param_dim
    series_slots: list[int] = []
    exponents: list[Fraction] = []
    for j in range(sheet.param_dim):
        lo, hi = sheet.bounds[j]
        if sheet.angular[j] and rng.random() < strat.angular_constant_probability:
            num = rng.randint(int(lo * 8) + 1, int(hi * 8) - 1)
            subs[j] = ("const", Fraction(num, 8))
        else:
            series_slots.append(j)
            exponents.append(rng.choice(strat.exponent_grid))
    if not series_slots:
        return None
    L = _coefficient_power(sheet, exponents)
    if L > 4:
        return None  # keep coefficients tame; the draw is retried
    e_min = min(exponents)
    tied = [k for k, e in enumerate(exponents) if e == e_min]
    base = Fraction(rng.randint(1, strat.max_power_base), rng.randint(1, 2))
    rho = base**L
    coeffs: list[Fraction] = [Fraction(0)] * len(series_slots)
    if len(tied) > 1:
        unit = rational_unit_vector(rng, len(tied))
        for k, u in zip(tied, unit):
            coeffs[k] = rho * u
    else:
        coeffs[tied[0]] = rho
    for k in range(len(series_slots)):
        if k in tied and len(tied) > 1:
            continue
        if coeffs[k] == 0 and k != tied[0]:
            extra = Fraction(rng.randint(1, strat.max_power_base), rng.randint(1, 2))
            coeffs[k] = extra**L
    for k, j in enumerate(series_slots):
        lo, hi = sheet.bounds[j]
        c = coeffs[k]
        if lo >= 0:
            c = abs(c)
        elif rng.random() < 0.5:
            c = -c
        if c == 0:
            return None
        subs[j] = ("series", PuiseuxSeries.monomial(exponents[k], c, strat.truncation))
    return subs  # type: ignore[return-value]


def _check_sampled_arc(germ: GermModel, arc: Arc) -> None:
    if germ.residual_series is not None:
        # Exact: every series term the truncation rules certify must cancel.
        for res in germ.residual_series(arc.components):
            if not res.is_zero:
                raise RuntimeError(
                    f"sampled arc {arc.label} leaves germ {germ.name}: "
                    f"defect series {res}"
                )
        return
    if germ.residual is None:
        return
    for t in np.linspace(1e-4, 5e-3, 20):
        x = arc.evaluate(float(t))
        if abs(germ.residual(x)) > 1e-10:
            raise RuntimeError(
                f"sampled arc {arc.label} leaves germ {germ.name}: residual "
                f"{germ.residual(x):.3e} at t={t:.4g}"
            )


def point_at_radius(
    germ: GermModel,
    sheet_index: int,
    r: float,
    rng: random.Random,
) -> np.ndarray:
    """A pseudo-random germ point at Euclidean distance r from the origin."""
    sheet = germ.sheets[sheet_index]
    lob = [float(lo) for lo, _ in sheet.bounds]
    hib = [float(hi) for _, hi in sheet.bounds]
    for _ in range(60):
        direction = []
        for j in range(sheet.param_dim):
            if sheet.angular[j]:
                direction.append(None)
            else:
                mag = rng.uniform(0.25, 1.0)
                if lob[j] < 0 and rng.random() < 0.5:
                    mag = -mag
                direction.append(mag)
        fixed = [
            rng.uniform(lob[j] + 0.05 * (hib[j] - lob[j]),
                        hib[j] - 0.05 * (hib[j] - lob[j]))
            if d is None else 0.0
            for j, d in enumerate(direction)
        ]

        def at(lam: float) -> np.ndarray:
            params = [
                fixed[j] if direction[j] is None else lam * direction[j]
                for j in range(sheet.param_dim)
            ]
            return sheet.evaluate(params)

        lam_hi = min(
            (hib[j] / d if d > 0 else lob[j] / d)
            for j, d in enumerate(direction)
            if d is not None
        )
        if float(np.linalg.norm(at(lam_hi))) < r:
            continue
        lo_l, hi_l = 0.0, lam_hi
        for _ in range(80):
            mid = 0.5 * (lo_l + hi_l)
            if float(np.linalg.norm(at(mid))) < r:
                lo_l = mid
            else:
                hi_l = mid
        return at(0.5 * (lo_l + hi_l))
    raise GermError(
        f"could not reach radius {r} on sheet {sheet_index} of {germ.name}"
    )
