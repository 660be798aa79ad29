"""Ensemble-average counts and growth rates via univariate saddle points.

Approximates a coefficient of a large power of a fixed polynomial with
nonnegative coefficients by the classic saddle-point formula

    Coeff(q^m, y^k) ~ d * q(y*)^m / (y*^k * sqrt(2*pi*m*b_q(y*))),

where y* solves a_q(y*) = k/m and d is the period of the support lattice
(2 for the even-powered weight polynomial p, 1 for beta).  On top of that it
builds the average weight/stopping-set counts, their exponential growth
rates, and the typical minimum relative weight/size (the smallest positive
zero of the growth rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import exactcomb
from .errors import NoBracketError, NoRootError, UnsupportedPolyError
from .exactcomb import ExactPolynomial
from .genfun import KIND_WEIGHT, EnsembleParams, check_kind, saddle_stats_uni, stop_gf, weight_gf

_SADDLE_RESIDUAL_TOL = 1e-12
_BRACKET_LIMIT = 1e300
_MIN_SEARCH_STEP = 1e-4


@dataclass(frozen=True)
class GrowthPoint:
    """One abscissa of the growth-rate curve."""

    abscissa: float
    saddle_x: float
    growth: float
    curvature_b: float


@dataclass(frozen=True)
class AvgCount:
    """Saddle-point approximation of an ensemble-average count at length n.

    ``count == prefactor * exp(n * exponent)``; the prefactor carries the
    1/sqrt(n) order and the support-lattice factor (0 if the target index is
    off the lattice, in which case the exact count vanishes).
    """

    n: int
    count: float
    exponent: float
    prefactor: float


def binary_entropy(w: float) -> float:
    """h(w) = -w ln w - (1-w) ln(1-w), continuously extended to {0, 1}."""
    if w <= 0.0 or w >= 1.0:
        if w in (0.0, 1.0):
            return 0.0
        raise ValueError(f"entropy argument {w} outside [0, 1]")
    return -(w * math.log(w) + (1.0 - w) * math.log(1.0 - w))


def gf_value(params: EnsembleParams, kind: str, x: float) -> float:
    """Dispatch to p (weight) or beta (stopping)."""
    return weight_gf(params, x) if kind == KIND_WEIGHT else stop_gf(params, x)


def solve_saddle(params: EnsembleParams, kind: str, abscissa: float) -> float:
    """Unique positive root x of a_phi(x) = r * abscissa, phi in {p, beta}.

    a_phi is strictly increasing from 0 to r, so the root is bracketed by
    doubling from 1e-8, pinned by 80 bisection steps and polished by Newton
    (a' = b/x).  Residual |a(x) - r*abscissa| < 1e-12.
    """
    check_kind(kind)
    if not 0.0 < abscissa < 1.0:
        raise ValueError(f"abscissa must lie in (0, 1), got {abscissa}")
    r = params.right_degree
    target = r * abscissa

    def resid(x: float) -> float:
        return saddle_stats_uni(params, kind, x).a - target

    lo = 1e-8
    if resid(lo) > 0.0:
        raise NoBracketError(
            f"abscissa {abscissa} below the attainable range of a/r")
    hi = 2e-8
    while resid(hi) < 0.0:
        lo = hi
        hi *= 2.0
        if hi > _BRACKET_LIMIT:
            raise NoBracketError(
                f"no sign change up to x={hi:g} for abscissa {abscissa}")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if resid(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    best_x, best_f = x, abs(resid(x))
    for _ in range(8):
        stats = saddle_stats_uni(params, kind, x)
        f = stats.a - target
        if abs(f) < best_f:
            best_x, best_f = x, abs(f)
        if abs(f) < 1e-15:
            break
        x_new = x - f * x / stats.b  # a'(x) = b(x)/x
        if x_new <= 0.0:
            x_new = 0.5 * x
        x = x_new
    if abs(resid(x)) > best_f:
        x = best_x
    if abs(resid(x)) >= _SADDLE_RESIDUAL_TOL:
        raise NoBracketError(
            f"saddle residual above tolerance at abscissa {abscissa}")
    return x


def growth_point(params: EnsembleParams, kind: str, abscissa: float) -> GrowthPoint:
    """Saddle, growth exponent and curvature at one abscissa in (0, 1)."""
    x = solve_saddle(params, kind, abscissa)
    l, r = params.left_degree, params.right_degree
    stats = saddle_stats_uni(params, kind, x)
    growth = ((l / r) * math.log(gf_value(params, kind, x))
              - (l - 1) * binary_entropy(abscissa)
              - l * abscissa * math.log(x))
    return GrowthPoint(abscissa=abscissa, saddle_x=x, growth=growth,
                       curvature_b=stats.b)


def growth_rate(params: EnsembleParams, kind: str, abscissa: float) -> float:
    """Exponential growth rate of the average count at the given abscissa."""
    return growth_point(params, kind, abscissa).growth


def hayman_coeff(poly: ExactPolynomial, m: int, k: int) -> float:
    """Saddle-point approximation of Coeff(poly^m, y^k).

    Computes the support-lattice period d from the exact exponent set:
    returns 0.0 when k is off the lattice and multiplies the Gaussian
    approximation by d otherwise.
    """
    if poly.variable_count != 1:
        raise UnsupportedPolyError("univariate polynomial required")
    terms = poly.terms
    if len(terms) < 2:
        raise UnsupportedPolyError("polynomial needs at least 2 nonzero terms")
    if any(c < 0 for c in terms.values()):
        raise UnsupportedPolyError("polynomial coefficients must be nonnegative")
    if 0 not in terms:
        raise UnsupportedPolyError("polynomial needs a nonzero constant term")
    deg = poly.degree()
    if not 0 < k < m * deg:
        raise ValueError(f"index k={k} outside (0, {m * deg})")
    d = poly.support_period()
    if k % d != 0:
        return 0.0

    items = sorted(terms.items())

    def moments(y: float):
        s0 = s1 = s2 = 0.0
        for e, c in items:
            w = c * y ** e
            s0 += w
            s1 += e * w
            s2 += e * e * w
        mean = s1 / s0
        return s0, mean, s2 / s0 - mean * mean

    target = k / m
    lo, hi = 1e-12, 1.0
    while moments(hi)[1] < target:
        hi *= 2.0
        if hi > _BRACKET_LIMIT:
            raise NoBracketError(f"no saddle bracket for k/m = {target}")
    if moments(lo)[1] > target:
        raise NoBracketError(f"no saddle bracket for k/m = {target}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if moments(mid)[1] < target:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    val, _, var = moments(y)
    return d * math.exp(m * math.log(val) - k * math.log(y)) / math.sqrt(
        2.0 * math.pi * m * var)


def avg_count(params: EnsembleParams, kind: str, n: int, abscissa: float) -> AvgCount:
    """Average count of weight/size n*abscissa objects at block length n.

    Exponent: (l/r) ln phi(x*) - (l-1) h(abscissa) - l*abscissa*ln x*.
    Prefactor: d*sqrt(r)/sqrt(2*pi*n*b_phi(x*)) with d the support period of
    phi, or 0 when the edge count n*l*abscissa falls off phi's support
    lattice (then the exact average is 0).
    """
    check_kind(kind)
    l, r = params.left_degree, params.right_degree
    point = growth_point(params, kind, abscissa)
    k = n * l * abscissa
    k_int = round(k)
    if abs(k - k_int) > 1e-9:
        raise ValueError(f"n*l*abscissa = {k} is not integral")
    d = _check_poly(params, kind).support_period()
    if k_int % d != 0:
        return AvgCount(n=n, count=0.0, exponent=point.growth, prefactor=0.0)
    prefactor = d * math.sqrt(r) / math.sqrt(2.0 * math.pi * n * point.curvature_b)
    return AvgCount(n=n, count=prefactor * math.exp(n * point.growth),
                    exponent=point.growth, prefactor=prefactor)


def min_abscissa(params: EnsembleParams, kind: str) -> float:
    """Smallest zero of the growth rate in (0, 0.5): the typical minimum
    relative weight (or stopping-set size).

    Scans with step 1e-4 for the first sign change, then bisects to absolute
    tolerance 1e-9.  Raises NoRootError when the growth rate is positive on
    the whole grid.
    """
    check_kind(kind)
    step = _MIN_SEARCH_STEP
    w_prev = step
    if growth_rate(params, kind, w_prev) >= 0.0:
        raise NoRootError("growth rate nonnegative at the left edge of the grid")
    w = w_prev + step
    while w < 0.5 + 0.5 * step:
        w_cur = min(w, 0.5 - 1e-12)
        if growth_rate(params, kind, w_cur) >= 0.0:
            lo, hi = w_prev, w_cur
            while hi - lo > 1e-9:
                mid = 0.5 * (lo + hi)
                if growth_rate(params, kind, mid) < 0.0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        w_prev = w_cur
        w += step
    raise NoRootError("no growth-rate sign change on (0, 0.5)")


@lru_cache(maxsize=None)
def _check_poly_cached(r: int, kind: str) -> ExactPolynomial:
    return (exactcomb.poly_weight_check(r) if kind == KIND_WEIGHT
            else exactcomb.poly_stop_check(r))


def _check_poly(params: EnsembleParams, kind: str) -> ExactPolynomial:
    return _check_poly_cached(params.right_degree, kind)
