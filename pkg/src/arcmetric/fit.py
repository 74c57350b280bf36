"""Exponent estimation from multiscale measurements.

Log-log least squares across geometric scales, rational snapping of fitted
slopes, and a golden-section scalar minimizer used by the per-scale distance
probes.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def loglog_slope(ts: Sequence[float], ds: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and R^2 of log(d) against log(t).

    Scales with nonpositive d must be filtered by the caller.  A constant
    response (zero variance) counts as a perfect fit of slope 0.
    """
    if len(ts) != len(ds) or len(ts) < 2:
        raise ValueError("need at least two (t, d) samples")
    x = np.log(np.asarray(ts, dtype=float))
    y = np.log(np.asarray(ds, dtype=float))
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot < 1e-24:
        r2 = 1.0 if ss_res < 1e-18 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), r2


def snap_to_rational(
    x: float, max_denominator: int = 12, tolerance: float = 0.05
) -> Fraction | None:
    """Nearest fraction with a small denominator, or None if none is close."""
    cand = Fraction(x).limit_denominator(max_denominator)
    return cand if abs(x - float(cand)) <= tolerance else None


def golden_section_min(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Golden-section minimum of a unimodal function on [lo, hi]."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    xm = (a + b) / 2.0
    return xm, fn(xm)


def geometric_scales(k_min: int = 4, k_max: int = 14, base: float = 0.5) -> tuple[float, ...]:
    """Scales base**k for k_min <= k <= k_max, descending in t."""
    if k_max < k_min:
        raise ValueError("k_max must be >= k_min")
    if not 0.0 < base < 1.0:
        raise ValueError("base must lie in (0, 1)")
    return tuple(base**k for k in range(k_min, k_max + 1))
