"""Truncated Puiseux series over the rationals.

A series is a finite sum ``sum_i c_i * t**e_i`` with exact rational
coefficients ``c_i`` and strictly increasing nonnegative rational exponents
``e_i``, plus a truncation exponent ``T``: nothing is asserted about the
function at exponents ``>= T``.  Every operation propagates ``T`` so that
vanishing orders read off these series are sound, never optimistic.

All arithmetic stays inside rational coefficients.  An operation that would
need an irrational number (for instance the square root of a series whose
leading coefficient is not the square of a rational) raises
:class:`ExactnessError` instead of degrading to floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]

#: Exponents are plain :class:`fractions.Fraction` values; Fraction keeps them
#: reduced with a positive denominator, which is exactly the invariant needed.
Exponent = Fraction

DEFAULT_TRUNCATION = Fraction(8)
DEFAULT_MAX_RAMIFICATION = 24


class ExactnessError(ArithmeticError):
    """The operation would leave the field of rational coefficients."""


class RamificationError(ArithmeticError):
    """Exponent denominators exceeded the configured ramification bound."""


def _frac(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


def integer_nth_root(n: int, k: int) -> int | None:
    """Exact k-th root of a nonnegative integer, or None if there is none."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if n in (0, 1) or k == 1:
        return n
    lo, hi = 0, 1 << (n.bit_length() // k + 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**k == n else None


def rational_nth_root(c: Fraction, k: int) -> Fraction | None:
    """Exact rational k-th root of c, or None.

    Negative c is allowed for odd k.  The root returned is the real one.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if c < 0:
        if k % 2 == 0:
            return None
        r = rational_nth_root(-c, k)
        return None if r is None else -r
    p = integer_nth_root(c.numerator, k)
    if p is None:
        return None
    q = integer_nth_root(c.denominator, k)
    if q is None:
        return None
    return Fraction(p, q)


@dataclass(frozen=True)
class ContactOrder:
    """A vanishing order: either an exact value or a truncation-limited bound.

    ``is_finite`` distinguishes an exactly known order from "at least
    ``value``", the latter meaning the quantity vanished through the whole
    reliable window of the series involved.
    """

    value: Fraction
    is_finite: bool

    @classmethod
    def finite(cls, value: Rational) -> "ContactOrder":
        return cls(_frac(value), True)

    @classmethod
    def at_least(cls, value: Rational) -> "ContactOrder":
        return cls(_frac(value), False)

    @property
    def sort_key(self) -> float:
        # Truncation-limited orders compare as +infinity; consumers must
        # treat any comparison involving them as tentative.
        return float(self.value) if self.is_finite else math.inf

    def __str__(self) -> str:
        return str(self.value) if self.is_finite else f">= {self.value}"


class PuiseuxSeries:
    """Immutable truncated Puiseux series with exact rational data."""

    __slots__ = ("terms", "truncation")

    terms: tuple[tuple[Fraction, Fraction], ...]
    truncation: Fraction

    def __init__(
        self,
        terms: Iterable[tuple[Rational, Rational]] = (),
        truncation: Rational = DEFAULT_TRUNCATION,
        *,
        max_denominator: int = DEFAULT_MAX_RAMIFICATION,
    ):
        trunc = _frac(truncation)
        if trunc <= 0:
            raise ValueError("truncation must be positive")
        merged: dict[Fraction, Fraction] = {}
        for e, c in terms:
            e = _frac(e)
            c = _frac(c)
            if e < 0:
                raise ValueError("negative exponents are not supported")
            if c == 0 or e >= trunc:
                continue
            merged[e] = merged.get(e, Fraction(0)) + c
        pairs = tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        ram = 1
        for e, _ in pairs:
            ram = ram * e.denominator // math.gcd(ram, e.denominator)
            if ram > max_denominator:
                raise RamificationError(
                    f"exponent denominators reach {ram}, above the bound "
                    f"{max_denominator}"
                )
        object.__setattr__(self, "terms", pairs)
        object.__setattr__(self, "truncation", trunc)

    def __setattr__(self, *_):
        raise AttributeError("PuiseuxSeries is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, truncation: Rational = DEFAULT_TRUNCATION) -> "PuiseuxSeries":
        return cls((), truncation)

    @classmethod
    def constant(
        cls, c: Rational, truncation: Rational = DEFAULT_TRUNCATION
    ) -> "PuiseuxSeries":
        return cls(((Fraction(0), _frac(c)),), truncation)

    @classmethod
    def monomial(
        cls,
        exponent: Rational,
        coeff: Rational = 1,
        truncation: Rational = DEFAULT_TRUNCATION,
    ) -> "PuiseuxSeries":
        return cls(((_frac(exponent), _frac(coeff)),), truncation)

    @classmethod
    def identity(cls, truncation: Rational = DEFAULT_TRUNCATION) -> "PuiseuxSeries":
        """The series t."""
        return cls.monomial(1, 1, truncation)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def leading(self) -> tuple[Fraction, Fraction] | None:
        return self.terms[0] if self.terms else None

    def order(self) -> ContactOrder:
        """Exponent of the first nonzero term, or a truncation bound."""
        if self.terms:
            return ContactOrder.finite(self.terms[0][0])
        return ContactOrder.at_least(self.truncation)

    def ramification(self) -> int:
        ram = 1
        for e, _ in self.terms:
            ram = ram * e.denominator // math.gcd(ram, e.denominator)
        return ram

    def coefficient(self, exponent: Rational) -> Fraction:
        e = _frac(exponent)
        for ei, ci in self.terms:
            if ei == e:
                return ci
            if ei > e:
                break
        return Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return self.terms == other.terms and self.truncation == other.truncation

    def __hash__(self) -> int:
        return hash((self.terms, self.truncation))

    def agrees_with(self, other: "PuiseuxSeries") -> bool:
        """True when both series match below the smaller truncation."""
        cut = min(self.truncation, other.truncation)
        mine = tuple((e, c) for e, c in self.terms if e < cut)
        theirs = tuple((e, c) for e, c in other.terms if e < cut)
        return mine == theirs

    def __repr__(self) -> str:
        if not self.terms:
            return f"O(t^{self.truncation})"
        bits = []
        for e, c in self.terms:
            if e == 0:
                bits.append(str(c))
            else:
                tp = "t" if e == 1 else f"t^({e})"
                bits.append(tp if c == 1 else f"{c}*{tp}")
        return " + ".join(bits) + f" + O(t^{self.truncation})"

    # -- ring operations ---------------------------------------------------

    def _ord_or_trunc(self) -> Fraction:
        return self.terms[0][0] if self.terms else self.truncation

    def __add__(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        trunc = min(self.truncation, other.truncation)
        return PuiseuxSeries(self.terms + other.terms, trunc)

    def __neg__(self) -> "PuiseuxSeries":
        return PuiseuxSeries(tuple((e, -c) for e, c in self.terms), self.truncation)

    def __sub__(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _frac(other)
            return PuiseuxSeries(
                tuple((e, ci * c) for e, ci in self.terms), self.truncation
            )
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        # Unknown tails multiply the other factor's leading part, so the
        # product is reliable only below min(Tf + ord g, Tg + ord f).
        trunc = min(
            self.truncation + other._ord_or_trunc(),
            other.truncation + self._ord_or_trunc(),
        )
        acc: dict[Fraction, Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if e < trunc:
                    acc[e] = acc.get(e, Fraction(0)) + c1 * c2
        return PuiseuxSeries(tuple(acc.items()), trunc)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Rational) -> "PuiseuxSeries":
        c = _frac(scalar)
        if c == 0:
            raise ZeroDivisionError("division of a series by zero")
        return self * (1 / c)

    def int_pow(self, n: int) -> "PuiseuxSeries":
        if n < 0:
            raise ValueError("negative powers are not supported")
        if n == 0:
            return PuiseuxSeries.constant(1, self.truncation)
        result: PuiseuxSeries | None = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        assert result is not None
        return result

    def __pow__(self, n: int) -> "PuiseuxSeries":
        return self.int_pow(n)

    def truncate_to(self, truncation: Rational) -> "PuiseuxSeries":
        trunc = min(_frac(truncation), self.truncation)
        return PuiseuxSeries(self.terms, trunc)

    def shift(self, delta: Rational) -> "PuiseuxSeries":
        """Multiply by t**delta.  Internal exponents must stay nonnegative."""
        d = _frac(delta)
        return PuiseuxSeries(
            tuple((e + d, c) for e, c in self.terms), self.truncation + d
        )

    def scale_exponents(
        self, factor: Rational, *, max_denominator: int = DEFAULT_MAX_RAMIFICATION
    ) -> "PuiseuxSeries":
        """Substitute t -> t**factor, factor > 0."""
        f = _frac(factor)
        if f <= 0:
            raise ValueError("exponent scale must be positive")
        return PuiseuxSeries(
            tuple((e * f, c) for e, c in self.terms),
            self.truncation * f,
            max_denominator=max_denominator,
        )

    # -- analytic operations -----------------------------------------------

    def differentiate(self) -> "PuiseuxSeries":
        terms = tuple((e - 1, c * e) for e, c in self.terms if e != 0)
        trunc = self.truncation - 1
        if trunc <= 0:
            raise ValueError("truncation too small to differentiate")
        return PuiseuxSeries(terms, trunc)

    def nth_root(
        self, k: int, *, max_denominator: int = DEFAULT_MAX_RAMIFICATION
    ) -> "PuiseuxSeries":
        """Exact k-th root.

        Requires a nonzero series whose leading coefficient has a rational
        k-th root; even k additionally needs a positive leading coefficient.
        """
        if k < 1:
            raise ValueError("root degree must be >= 1")
        if k == 1:
            return self
        if self.is_zero:
            raise ExactnessError("root of a series with no visible terms")
        e0, c0 = self.terms[0]
        if c0 < 0 and k % 2 == 0:
            raise ExactnessError("even root of a negative leading coefficient")
        root_c = rational_nth_root(c0, k)
        if root_c is None:
            raise ExactnessError(
                f"leading coefficient {c0} has no rational {k}-th root; "
                "rescale the input to a perfect power"
            )
        new_lead = e0 / k
        if new_lead.denominator > max_denominator:
            raise RamificationError(
                f"root would need exponent denominator {new_lead.denominator}"
            )
        # f = c0 t^e0 (1 + u), ord u > 0; f^(1/k) = c0^(1/k) t^(e0/k) (1+u)^(1/k)
        u = PuiseuxSeries(
            tuple((e - e0, c / c0) for e, c in self.terms[1:]),
            self.truncation - e0,
        )
        body = binomial_series(Fraction(1, k), u)
        return (body * root_c).shift(new_lead)

    def sqrt(self, *, max_denominator: int = DEFAULT_MAX_RAMIFICATION) -> "PuiseuxSeries":
        """Square root; the result g satisfies g*g == self up to truncation."""
        if not self.is_zero and self.terms[0][1] < 0:
            raise ExactnessError("square root of a negative leading coefficient")
        return self.nth_root(2, max_denominator=max_denominator)

    def compose(
        self, inner: "PuiseuxSeries", *, max_denominator: int = DEFAULT_MAX_RAMIFICATION
    ) -> "PuiseuxSeries":
        """self(inner(t)).  ``inner`` must have positive order.

        Fractional exponents of ``self`` take k-th roots of ``inner``, so the
        leading coefficient of ``inner`` must admit the corresponding rational
        roots (ExactnessError otherwise).
        """
        if inner.is_zero:
            raise ValueError("composition with a series with no visible terms")
        omega = inner.terms[0][0]
        if omega <= 0:
            raise ValueError("inner series must have positive order")
        tail = omega * self.truncation
        acc = PuiseuxSeries.zero(tail)
        roots: dict[int, PuiseuxSeries] = {1: inner}
        for e, c in self.terms:
            if e == 0:
                acc = acc + PuiseuxSeries.constant(c, tail)
                continue
            base = roots.get(e.denominator)
            if base is None:
                base = inner.nth_root(e.denominator, max_denominator=max_denominator)
                roots[e.denominator] = base
            acc = acc + base.int_pow(e.numerator) * c
        return acc.truncate_to(tail)

    def compositional_inverse(
        self, *, max_denominator: int = DEFAULT_MAX_RAMIFICATION
    ) -> "PuiseuxSeries":
        """The series h with self(h(t)) == t up to truncation.

        Requires order exactly 1.  Newton steps double the number of correct
        terms, so the loop is logarithmic in the truncation.
        """
        lead = self.leading
        if lead is None or lead[0] != 1:
            raise ValueError("compositional inverse needs order exactly 1")
        c = lead[1]
        trunc = self.truncation
        h = PuiseuxSeries.monomial(1, 1 / c, trunc)
        deriv = self.differentiate()
        max_steps = 4 + math.ceil(math.log2(max(float(trunc), 2.0)))
        for _ in range(max_steps):
            fh = self.compose(h, max_denominator=max_denominator)
            err = fh - PuiseuxSeries.identity(fh.truncation)
            if err.is_zero:
                break
            dh = deriv.compose(h, max_denominator=max_denominator)
            h = (h - err * inverse_unit(dh)).truncate_to(trunc)
        else:
            raise ArithmeticError("inversion did not converge; report this input")
        return h

    # -- numerics ----------------------------------------------------------

    def evaluate(self, t: float) -> float:
        """Float value at t >= 0, ignoring the truncation tail."""
        if t < 0:
            raise ValueError("series are evaluated on t >= 0")
        return float(sum(float(c) * t ** float(e) for e, c in self.terms))


def usable_radius(series: PuiseuxSeries) -> float:
    """Scale below which truncated evaluation is numerically trustworthy.

    Terms c_i t^(e_i) and c_j t^(e_j) exchange dominance at
    t = (|c_i| / |c_j|)^(1 / (e_j - e_i)); the smallest such crossover over
    all term pairs bounds where the partial sum tracks the leading behavior.
    """
    radius = math.inf
    terms = series.terms
    for i in range(len(terms)):
        e_i, c_i = terms[i]
        for j in range(i + 1, len(terms)):
            e_j, c_j = terms[j]
            ratio = abs(float(c_i)) / abs(float(c_j))
            radius = min(radius, ratio ** (1.0 / float(e_j - e_i)))
    return radius


def binomial_series(alpha: Fraction, u: PuiseuxSeries) -> PuiseuxSeries:
    """(1 + u)**alpha for ord(u) > 0, via the binomial expansion."""
    if not u.is_zero and u.terms[0][0] <= 0:
        raise ValueError("binomial series needs ord(u) > 0")
    out = PuiseuxSeries.constant(1, u.truncation)
    if u.is_zero:
        return out
    ord_u = u.terms[0][0]
    k_max = int(u.truncation / ord_u) + 1
    power = PuiseuxSeries.constant(1, u.truncation)
    coeff = Fraction(1)
    for k in range(1, k_max + 1):
        coeff = coeff * (alpha - (k - 1)) / k
        power = power * u
        if power.is_zero and power.truncation >= u.truncation:
            break
        out = out + power * coeff
    return out.truncate_to(u.truncation)


def inverse_unit(f: PuiseuxSeries) -> PuiseuxSeries:
    """Multiplicative inverse of a series with a nonzero constant term."""
    lead = f.leading
    if lead is None or lead[0] != 0:
        raise ValueError("multiplicative inverse needs order exactly 0")
    c0 = lead[1]
    u = PuiseuxSeries(tuple((e, c / c0) for e, c in f.terms[1:]), f.truncation)
    return binomial_series(Fraction(-1), u) / c0
