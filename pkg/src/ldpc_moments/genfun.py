"""Check-node generating functions of regular LDPC ensembles.

For an ensemble with variable degree ``l`` and check degree ``r`` this module
evaluates, in double precision,

* ``p(x)  = ((1+x)^r + (1-x)^r) / 2``            (single check, codewords)
* ``beta(x) = (1+x)^r - r*x``                    (single check, stopping sets)
* ``f(x1,x2,x3)``: the parity-filtered expansion of ``(1+x1+x2+x3)^r``
  keeping monomials whose three exponents are all even or all odd
  (codeword pairs), and
* ``g(x1,x2,x3)``: its stopping-set analog where each of the two index sets
  must meet every check 0 or >= 2 times,

together with their logarithmic-derivative statistics ``a`` (local mean of
the induced exponent distribution), ``b`` (its variance) and, for the
trivariate functions, the mean vector ``a_vec`` and covariance matrix ``B``.
Everything here is a pure function; all derivatives are analytic.

Evaluation sticks to the binomial-power forms above.  Expanded
integer-coefficient forms live in :mod:`ldpc_moments.exactcomb`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonpositiveGFError

# Largest supported check degree: keeps (1+x)^r within double range on the
# abscissa domains exercised by the asymptotic pipeline.
MAX_RIGHT_DEGREE = 64

KIND_WEIGHT = "weight"
KIND_STOPPING = "stopping"
KINDS = (KIND_WEIGHT, KIND_STOPPING)

# Sign patterns of the four brackets of f: exactly the characters of the
# subgroup of {+1,-1}^3 with product of any two coordinates matching the
# third, which kills every monomial that is not all-even or all-odd.
_F_SIGNS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


@dataclass(frozen=True)
class EnsembleParams:
    """Degree pair (l, r) of a regular LDPC ensemble.

    ``left_degree`` is the number of edges per variable node, ``right_degree``
    the number per check node.  Requires ``2 <= l < r <= MAX_RIGHT_DEGREE``.
    """

    left_degree: int
    right_degree: int

    def __post_init__(self) -> None:
        l, r = self.left_degree, self.right_degree
        if not (isinstance(l, int) and isinstance(r, int)):
            raise TypeError("degrees must be integers")
        if not 2 <= l < r:
            raise ValueError(f"need 2 <= l < r, got (l, r) = ({l}, {r})")
        if r > MAX_RIGHT_DEGREE:
            raise ValueError(
                f"right degree {r} exceeds supported maximum {MAX_RIGHT_DEGREE}")

    @property
    def design_rate(self) -> float:
        return 1.0 - self.left_degree / self.right_degree


@dataclass(frozen=True)
class SaddleStats1:
    """Univariate log-derivative pair: a(x) = x phi'/phi and b(x) = x a'(x)."""

    a: float
    b: float


@dataclass(frozen=True)
class TriSaddleStats:
    """Mean vector and curvature matrix of a trivariate generating function.

    ``a`` holds a_i = x_i (d phi / d x_i) / phi and ``b_matrix`` the symmetric
    3x3 matrix B_ij = x_j (d a_i / d x_j).
    """

    a: np.ndarray
    b_matrix: np.ndarray
    det: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "det", float(np.linalg.det(self.b_matrix)))


def weight_gf(params: EnsembleParams, x: float) -> float:
    """Evaluate p(x) = ((1+x)^r + (1-x)^r)/2 for x >= 0."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    r = params.right_degree
    return 0.5 * ((1.0 + x) ** r + (1.0 - x) ** r)


def stop_gf(params: EnsembleParams, x: float) -> float:
    """Evaluate beta(x) = (1+x)^r - r*x for x >= 0."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    r = params.right_degree
    return (1.0 + x) ** r - r * x


def pair_gf_weight(params: EnsembleParams, pt) -> float:
    """Evaluate the codeword-pair generating function f at a point >= 0."""
    x1, x2, x3 = _check_point(pt)
    r = params.right_degree
    return 0.25 * sum(
        (1.0 + s1 * x1 + s2 * x2 + s3 * x3) ** r for s1, s2, s3 in _F_SIGNS)


def pair_gf_stop(params: EnsembleParams, pt) -> float:
    """Evaluate the stopping-set-pair generating function g at a point >= 0.

    g contains subtracted terms, so the value may be negative far from the
    region of interest; callers taking ln(g) must check the sign first.
    """
    x1, x2, x3 = _check_point(pt)
    r = params.right_degree
    return ((1.0 + x1 + x2 + x3) ** r
            - r * (1.0 + x1) ** (r - 1) * (x2 + x3)
            - r * x1 * ((1.0 + x3) ** (r - 1) - (r - 1) * x3)
            - r * x2 * ((1.0 + x3) ** (r - 1) - 1.0))


def saddle_stats_uni(params: EnsembleParams, kind: str, x: float) -> SaddleStats1:
    """Log-derivative statistics of p (weight) or beta (stopping) at x > 0.

    Uses b = a + x^2 phi''/phi - a^2 with ratio forms of phi'/phi and
    phi''/phi that stay finite for large x (no overflowing powers).
    """
    check_kind(kind)
    if x <= 0:
        raise ValueError("x must be positive")
    r = params.right_degree
    if kind == KIND_WEIGHT:
        # divide numerator and denominator by (1+x)^(r-1); v in (-1, 1]
        v = (1.0 - x) / (1.0 + x)
        a = r * x * (1.0 - v ** (r - 1)) / ((1.0 + x) * (1.0 + v ** r))
        dpp = r * (r - 1) * (1.0 + v ** (r - 2)) / ((1.0 + x) ** 2 * (1.0 + v ** r))
    else:
        u = (1.0 + x) ** (-(r - 1))
        a = r * x * (1.0 - u) / ((1.0 + x) - r * x * u)
        dpp = r * (r - 1) / ((1.0 + x) ** 2 - r * x * (1.0 + x) ** (-(r - 2)))
    b = a + x * x * dpp - a * a
    return SaddleStats1(a=a, b=b)


def saddle_stats_tri(params: EnsembleParams, kind: str, pt) -> TriSaddleStats:
    """Mean vector a and curvature matrix B of f or g at a positive point.

    Raises :class:`NonpositiveGFError` if the generating function is not
    strictly positive at ``pt`` (possible for g, which has negative terms).
    """
    check_kind(kind)
    x = _check_point(pt)
    if min(x) <= 0:
        raise ValueError("point must be componentwise positive")
    val, grad, hess = pair_vgh(params, kind, x[0], x[1], x[2])
    if val <= 0:
        raise NonpositiveGFError(
            f"pair generating function nonpositive at {pt}: {val}")
    # ratios first: grad products and val^2 can overflow while val itself
    # is still comfortably representable
    g_over = [grad[i] / val for i in range(3)]
    a = [x[i] * g_over[i] for i in range(3)]
    # B_ij = x_i x_j (hess_ij/val - (grad_i/val)(grad_j/val)) + delta_ij a_i
    B = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            B[i, j] = x[i] * x[j] * (hess[i][j] / val - g_over[i] * g_over[j])
        B[i, i] += a[i]
    return TriSaddleStats(a=np.array(a), b_matrix=B)


def pair_vgh(params: EnsembleParams, kind: str, x1: float, x2: float, x3: float):
    """Value, gradient and Hessian of f or g, all from closed forms.

    Returns plain floats/lists; used by the Newton solvers where building
    numpy arrays per evaluation would dominate the cost.
    """
    r = params.right_degree
    if kind == KIND_WEIGHT:
        val = 0.0
        grad = [0.0, 0.0, 0.0]
        hess = [[0.0] * 3 for _ in range(3)]
        for s in _F_SIGNS:
            base = 1.0 + s[0] * x1 + s[1] * x2 + s[2] * x3
            b0 = base ** (r - 2)
            b1 = b0 * base
            val += b1 * base
            for i in range(3):
                grad[i] += s[i] * b1
                for j in range(i, 3):
                    hess[i][j] += s[i] * s[j] * b0
        val *= 0.25
        c1 = 0.25 * r
        c2 = 0.25 * r * (r - 1)
        grad = [c1 * gi for gi in grad]
        for i in range(3):
            for j in range(i, 3):
                hess[i][j] *= c2
                hess[j][i] = hess[i][j]
        return val, grad, hess

    # stopping kind: derivatives of the four printed terms of g
    S0 = 1.0 + x1 + x2 + x3
    q1 = 1.0 + x1
    q3 = 1.0 + x3
    val = (S0 ** r - r * q1 ** (r - 1) * (x2 + x3)
           - r * x1 * (q3 ** (r - 1) - (r - 1) * x3)
           - r * x2 * (q3 ** (r - 1) - 1.0))
    Sd = S0 ** (r - 1)
    grad = [
        r * Sd - r * (r - 1) * q1 ** (r - 2) * (x2 + x3)
        - r * (q3 ** (r - 1) - (r - 1) * x3),
        r * Sd - r * q1 ** (r - 1) - r * (q3 ** (r - 1) - 1.0),
        r * Sd - r * q1 ** (r - 1)
        - r * (r - 1) * (x1 * (q3 ** (r - 2) - 1.0) + x2 * q3 ** (r - 2)),
    ]
    Sdd = S0 ** (r - 2)
    c = r * (r - 1)
    h00 = c * Sdd - c * (r - 2) * q1 ** (r - 3) * (x2 + x3)
    h01 = c * Sdd - c * q1 ** (r - 2)
    h02 = c * (Sdd - q1 ** (r - 2) - q3 ** (r - 2) + 1.0)
    h11 = c * Sdd
    h12 = c * Sdd - c * q3 ** (r - 2)
    h22 = c * Sdd - c * (r - 2) * q3 ** (r - 3) * (x1 + x2)
    hess = [[h00, h01, h02], [h01, h11, h12], [h02, h12, h22]]
    return val, grad, hess


def _check_point(pt):
    x = tuple(float(v) for v in pt)
    if len(x) != 3:
        raise ValueError("point must have exactly 3 components")
    if not all(math.isfinite(v) for v in x):
        raise ValueError("point components must be finite")
    if min(x) < 0:
        raise ValueError("point components must be nonnegative")
    return x
