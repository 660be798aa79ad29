"""Configuration-model sampling and direct counting against exact formulas."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from ldpc_moments.ensemble_oracle import (
    TannerGraph,
    count_words,
    exhaustive_moment,
    mc_moments,
    sample_graph,
)
from ldpc_moments.errors import DivisibilityError, TooLargeError
from ldpc_moments.exactcomb import exact_first_moment, exact_second_moment
from ldpc_moments.genfun import EnsembleParams

P24 = EnsembleParams(2, 4)
P36 = EnsembleParams(3, 6)


def _lehmer_rank(perm):
    """Rank of a permutation in lexicographic order."""
    perm = list(perm)
    n = len(perm)
    rank = 0
    for i, v in enumerate(perm):
        smaller = sum(1 for u in perm[i + 1:] if u < v)
        rank = rank * (n - i) + smaller
    return rank


class TestSampleGraph:
    def test_deterministic_in_seed(self):
        g1 = sample_graph(P24, 4, 99)
        g2 = sample_graph(P24, 4, 99)
        assert np.array_equal(g1.socket_perm, g2.socket_perm)
        g3 = sample_graph(P24, 4, 100)
        assert not np.array_equal(g1.socket_perm, g3.socket_perm)

    def test_degree_tallies(self):
        g = sample_graph(P24, 4, 5)
        mult = g.multiplicity
        assert mult.sum(axis=0).tolist() == [2, 2, 2, 2]  # variables
        assert mult.sum(axis=1).tolist() == [4, 4]  # checks

    def test_divisibility_guard(self):
        with pytest.raises(DivisibilityError):
            sample_graph(P36, 5, 0)

    def test_socket_permutations_uniform_chi_square(self):
        # 40320 = 64 * 630: Lehmer-rank buckets are exactly equiprobable
        samples = 1_000_000
        buckets = np.zeros(64, dtype=np.int64)
        for i in range(samples):
            g = sample_graph(P24, 4, 1_000_000 + i)
            buckets[_lehmer_rank(g.socket_perm.tolist()) % 64] += 1
        expected = samples / 64.0
        chi2 = float(((buckets - expected) ** 2 / expected).sum())
        assert chi2 < stats.chi2.ppf(0.99, 63)


class TestCountWords:
    @pytest.mark.parametrize("kind", ["weight", "stopping"])
    def test_empty_configuration(self, kind):
        g = sample_graph(P24, 4, 1)
        assert count_words(g, 0, kind) == 1

    def test_null_space_cardinality(self):
        for seed in range(10):
            g = sample_graph(P36, 12, seed)
            total = sum(count_words(g, W, "weight") for W in range(13))
            assert total & (total - 1) == 0  # always a power of two

    def test_permutation_equivariance(self):
        g = sample_graph(P36, 12, 42)
        relabel = np.random.default_rng(0).permutation(12)
        perm = np.empty_like(g.socket_perm)
        for new_v in range(12):
            old_v = relabel[new_v]
            perm[new_v * 3:(new_v + 1) * 3] = g.socket_perm[old_v * 3:(old_v + 1) * 3]
        g2 = TannerGraph(n=12, left_degree=3, right_degree=6, socket_perm=perm)
        for W in range(13):
            assert count_words(g, W, "weight") == count_words(g2, W, "weight")
            assert count_words(g, W, "stopping") == count_words(g2, W, "stopping")

    def test_stopping_counts_multiplicity(self):
        # a variable double-connected to a check satisfies ">= 2" on its own
        perm = np.array([0, 1, 4, 5, 2, 3, 6, 7])  # v0 -> check0 twice, ...
        g = TannerGraph(n=4, left_degree=2, right_degree=4, socket_perm=perm)
        assert g.multiplicity[0, 0] == 2
        assert count_words(g, 1, "stopping") >= 1

    def test_weight_multiplicity_cancels(self):
        # same graph: v0's double edge contributes 0 mod 2 to check 0
        perm = np.array([0, 1, 4, 5, 2, 3, 6, 7])
        g = TannerGraph(n=4, left_degree=2, right_degree=4, socket_perm=perm)
        assert count_words(g, 1, "weight") >= 1

    def test_size_cap(self):
        g = sample_graph(EnsembleParams(2, 4), 30, 0)
        with pytest.raises(TooLargeError):
            count_words(g, 2, "weight")


class TestMcMoments:
    def test_first_and_second_moment_within_three_sigma(self):
        exact1 = float(exact_first_moment(P36, 12, 4, "weight"))
        exact2 = float(exact_second_moment(P36, 12, 4, "weight"))
        est1 = mc_moments(P36, 12, 4, "weight", 10_000, 2024, moment=1)
        est2 = mc_moments(P36, 12, 4, "weight", 10_000, 2024, moment=2)
        assert abs(est1.mean - exact1) <= est1.confidence_halfwidth_3sigma
        assert abs(est2.mean - exact2) <= est2.confidence_halfwidth_3sigma

    def test_single_sample_flagged(self):
        est = mc_moments(P24, 4, 2, "weight", 1, 7)
        assert est.variance == 0.0
        assert math.isnan(est.confidence_halfwidth_3sigma)

    def test_seed_schedule_is_per_sample(self):
        # the estimate is an order-insensitive function of seed+index counts
        est = mc_moments(P24, 4, 2, "weight", 50, 300)
        singles = [mc_moments(P24, 4, 2, "weight", 1, 300 + i).mean
                   for i in range(50)]
        assert est.mean == pytest.approx(np.mean(singles), rel=1e-12)

    def test_replication_coverage(self):
        # 3-sigma interval should contain the exact value almost always
        exact = float(exact_first_moment(P24, 4, 2, "weight"))
        hits = 0
        for rep in range(100):
            est = mc_moments(P24, 4, 2, "weight", 2000, 5000 + rep * 2000)
            if abs(est.mean - exact) <= est.confidence_halfwidth_3sigma:
                hits += 1
        assert hits >= 95


class TestExhaustiveMoment:
    @pytest.mark.parametrize("kind", ["weight", "stopping"])
    @pytest.mark.parametrize("W", [0, 1, 2, 3, 4])
    def test_matches_generating_function_first_moment(self, kind, W):
        assert exhaustive_moment(P24, 4, W, kind, 1) == exact_first_moment(
            P24, 4, W, kind)

    @pytest.mark.parametrize("kind", ["weight", "stopping"])
    @pytest.mark.parametrize("W", [0, 1, 2, 3, 4])
    def test_matches_generating_function_second_moment(self, kind, W):
        assert exhaustive_moment(P24, 4, W, kind, 2) == exact_second_moment(
            P24, 4, W, kind)

    def test_reference_value(self):
        assert exhaustive_moment(P24, 4, 2, "weight", 1) == Fraction(114, 35)

    def test_size_cap(self):
        with pytest.raises(TooLargeError):
            exhaustive_moment(P36, 4, 2, "weight", 1)  # 12! permutations
