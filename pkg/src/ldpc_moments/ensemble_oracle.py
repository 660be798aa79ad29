"""Configuration-model graph sampling and direct count oracles.

A graph is a uniformly random matching of the n*l labeled variable sockets
onto the n*l labeled check sockets; multi-edges are kept and enter every
count with their multiplicity (a variable joined twice to a check cancels
mod 2 for codewords and counts as ">= 2 connections" for stopping sets).
That convention is what makes the sampled and exhaustive averages agree
exactly with the generating-function formulas.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .errors import DivisibilityError, TooLargeError
from .genfun import KIND_STOPPING, KIND_WEIGHT, EnsembleParams, check_kind

_EXHAUSTIVE_N_CAP = 28
_NULLITY_CAP = 24  # 2^24 null-space vectors at most
_PERM_CAP = 40_000_000  # (n*l)! bound for exhaustive ensemble averages
_SUBSET_CHUNK = 4096


@dataclass(frozen=True)
class TannerGraph:
    """One labeled-socket graph: socket_perm[vs] is the check socket matched
    to variable socket vs.  Variable v owns sockets v*l .. v*l+l-1; check c
    owns sockets c*r .. c*r+r-1."""

    n: int
    left_degree: int
    right_degree: int
    socket_perm: np.ndarray

    @property
    def check_count(self) -> int:
        return self.n * self.left_degree // self.right_degree

    @cached_property
    def multiplicity(self) -> np.ndarray:
        """Check-by-variable edge multiplicity matrix."""
        l, r = self.left_degree, self.right_degree
        mult = np.zeros((self.check_count, self.n), dtype=np.int64)
        for v in range(self.n):
            for j in range(l):
                mult[self.socket_perm[v * l + j] // r, v] += 1
        return mult


def sample_graph(params: EnsembleParams, n: int, seed: int) -> TannerGraph:
    """Draw one graph uniformly over the (n*l)! socket permutations.

    Deterministic in ``seed`` (PCG64); callers running batches derive one
    seed per sample, so execution order never matters.
    """
    l, r = params.left_degree, params.right_degree
    if (n * l) % r != 0:
        raise DivisibilityError(f"r={r} must divide n*l={n * l}")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n * l)
    return TannerGraph(n=n, left_degree=l, right_degree=r, socket_perm=perm)


def count_words(graph: TannerGraph, W: int, kind: str) -> int:
    """Exact number of weight-W codewords or size-W stopping sets of a graph.

    Codewords: weight-W vectors in the GF(2) null space of the parity matrix
    (edge multiplicities reduced mod 2).  Stopping sets: W-subsets of
    variables such that no check sees exactly one incident edge slot.
    """
    check_kind(kind)
    n = graph.n
    if n > _EXHAUSTIVE_N_CAP:
        raise TooLargeError(f"n={n} above exhaustive cap {_EXHAUSTIVE_N_CAP}")
    if not 0 <= W <= n:
        raise ValueError(f"W={W} outside [0, {n}]")
    if kind == KIND_WEIGHT:
        return _count_weight(graph, W)
    return _count_stopping(graph, W)


@dataclass(frozen=True)
class MomentEstimate:
    """Monte-Carlo estimate of E[count^moment] with a 3-sigma halfwidth.

    With a single sample the variance is reported as 0 and the halfwidth as
    NaN (undefined), flagging the estimate as degenerate.
    """

    mean: float
    variance: float
    sample_count: int
    confidence_halfwidth_3sigma: float
    seed: int


def mc_moments(params: EnsembleParams, n: int, W: int, kind: str,
               samples: int, seed: int, moment: int = 1) -> MomentEstimate:
    """Sample mean/variance of count^moment over independent graphs.

    Per-sample seed is ``seed + index``; the estimate is therefore identical
    under any execution order or partitioning of the index range.
    """
    check_kind(kind)
    if samples < 1:
        raise ValueError("need at least one sample")
    if moment not in (1, 2):
        raise ValueError("moment must be 1 or 2")
    counts = np.empty(samples, dtype=np.float64)
    for idx in range(samples):
        graph = sample_graph(params, n, seed + idx)
        counts[idx] = count_words(graph, W, kind) ** moment
    mean = float(counts.mean())
    if samples == 1:
        return MomentEstimate(mean=mean, variance=0.0, sample_count=1,
                              confidence_halfwidth_3sigma=math.nan, seed=seed)
    var = float(counts.var(ddof=1))
    halfwidth = 3.0 * math.sqrt(var / samples)
    return MomentEstimate(mean=mean, variance=var, sample_count=samples,
                          confidence_halfwidth_3sigma=halfwidth, seed=seed)


def exhaustive_moment(params: EnsembleParams, n: int, W: int, kind: str,
                      moment: int) -> Fraction:
    """Exact ensemble average of count^moment by iterating all socket
    permutations.  Only feasible for (n*l)! up to about 4e7."""
    check_kind(kind)
    l, r = params.left_degree, params.right_degree
    if (n * l) % r != 0:
        raise DivisibilityError(f"r={r} must divide n*l={n * l}")
    if math.factorial(n * l) > _PERM_CAP:
        raise TooLargeError(f"({n}*{l})! exceeds the exhaustive cap")
    if not 0 <= W <= n:
        raise ValueError(f"W={W} outside [0, {n}]")
    if moment not in (1, 2):
        raise ValueError("moment must be 1 or 2")
    weight_sums, stop_sums = _exhaustive_tallies(l, r, n)
    sums = weight_sums if kind == KIND_WEIGHT else stop_sums
    return Fraction(sums[W][moment - 1], math.factorial(n * l))


# ---------------------------------------------------------------------------
# counting internals

def _parity_rows(graph: TannerGraph) -> list:
    """Bit-packed GF(2) parity rows (bit v set iff multiplicity odd)."""
    mult = graph.multiplicity
    rows = []
    for c in range(graph.check_count):
        row = 0
        for v in range(graph.n):
            if mult[c, v] & 1:
                row |= 1 << v
        rows.append(row)
    return rows


def _gf2_null_basis(rows: list, n: int) -> list:
    """Basis of the GF(2) null space of the given bit-packed rows."""
    rref = []
    pivot_cols = []
    for row in rows:
        cur = row
        for prow, pcol in zip(rref, pivot_cols):
            if (cur >> pcol) & 1:
                cur ^= prow
        if cur:
            pcol = cur.bit_length() - 1
            for k, prow in enumerate(rref):
                if (prow >> pcol) & 1:
                    rref[k] = prow ^ cur
            rref.append(cur)
            pivot_cols.append(pcol)
    pivot_set = set(pivot_cols)
    basis = []
    for free_col in range(n):
        if free_col in pivot_set:
            continue
        vec = 1 << free_col
        for prow, pcol in zip(rref, pivot_cols):
            if (prow >> free_col) & 1:
                vec |= 1 << pcol
        basis.append(vec)
    return basis


def _count_weight(graph: TannerGraph, W: int) -> int:
    basis = _gf2_null_basis(_parity_rows(graph), graph.n)
    if len(basis) > _NULLITY_CAP:
        raise TooLargeError(
            f"null space dimension {len(basis)} above cap {_NULLITY_CAP}")
    count = 1 if W == 0 else 0
    cur = 0
    for g in range(1, 1 << len(basis)):
        cur ^= basis[(g & -g).bit_length() - 1]  # Gray-code walk
        if cur.bit_count() == W:
            count += 1
    return count


def _count_stopping(graph: TannerGraph, W: int) -> int:
    if W == 0:
        return 1  # the empty set
    mult = graph.multiplicity
    n = graph.n
    total = 0
    combos = itertools.combinations(range(n), W)
    while True:
        chunk = list(itertools.islice(combos, _SUBSET_CHUNK))
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.intp)
        seen = mult[:, idx].sum(axis=2)  # checks x subsets
        total += int((~(seen == 1).any(axis=0)).sum())
    return total


def _profile_from_mult(mult_rows: tuple, n: int, kind: str) -> tuple:
    """Counts for every W at once by brute force over all 2^n subsets.

    Only used in the exhaustive regime where n <= 5.
    """
    counts = [0] * (n + 1)
    m = len(mult_rows)
    for mask in range(1 << n):
        ok = True
        for c in range(m):
            row = mult_rows[c]
            s = 0
            for v in range(n):
                if (mask >> v) & 1:
                    s += row[v]
            if (s & 1) if kind == KIND_WEIGHT else (s == 1):
                ok = False
                break
        if ok:
            counts[mask.bit_count()] += 1
    return tuple(counts)


@lru_cache(maxsize=None)
def _exhaustive_tallies(l: int, r: int, n: int):
    """Per-W sums of counts and squared counts over all socket permutations."""
    E = n * l
    m = E // r
    weight_sums = [[0, 0] for _ in range(n + 1)]
    stop_sums = [[0, 0] for _ in range(n + 1)]
    profiles = {}
    for perm in itertools.permutations(range(E)):
        mult = [[0] * n for _ in range(m)]
        for v in range(n):
            for j in range(l):
                mult[perm[v * l + j] // r][v] += 1
        key = tuple(tuple(row) for row in mult)
        prof = profiles.get(key)
        if prof is None:
            prof = (_profile_from_mult(key, n, KIND_WEIGHT),
                    _profile_from_mult(key, n, KIND_STOPPING))
            profiles[key] = prof
        wprof, sprof = prof
        for W in range(n + 1):
            cw, cs = wprof[W], sprof[W]
            weight_sums[W][0] += cw
            weight_sums[W][1] += cw * cw
            stop_sums[W][0] += cs
            stop_sums[W][1] += cs * cs
    return (tuple((a, b) for a, b in weight_sums),
            tuple((a, b) for a, b in stop_sums))
