"""Overlap saddles, dominance conditions, delta bounds, local limit ratios."""

import math

import numpy as np
import pytest

from ldpc_moments import exactcomb
from ldpc_moments.errors import DomainError, OffLatticeError
from ldpc_moments.firstmoment import growth_rate, min_abscissa, solve_saddle
from ldpc_moments.genfun import EnsembleParams, pair_gf_stop, pair_gf_weight
from ldpc_moments.secondmoment import (
    delta,
    delta34_closed_form,
    delta_value,
    endpoint_exponent,
    exponent_curve,
    local_limit_ratio,
    solve_overlap,
    stationarity_residual,
    verify_conditions,
)

P36 = EnsembleParams(3, 6)
P34 = EnsembleParams(3, 4)


def _reduced_residuals(params, kind, omega, alpha, saddle):
    """Residuals of the two reduced saddle equations, as printed (a_i / r)."""
    from ldpc_moments.genfun import saddle_stats_tri
    stats = saddle_stats_tri(params, kind, (saddle.t1, saddle.t2, saddle.t1))
    r = params.right_degree
    return (abs(stats.a[0] / r - (omega - alpha)),
            abs(stats.a[1] / r - alpha))


class TestSolveOverlap:
    def test_square_overlap_reduces_to_univariate_saddle(self):
        x = solve_saddle(P36, "weight", 0.3)
        s = solve_overlap(P36, "weight", 0.3, 0.09)
        assert s.t1 == pytest.approx(x, abs=1e-9)
        assert s.t2 == pytest.approx(x * x, abs=1e-9)

    def test_near_diagonal_limit(self):
        x = solve_saddle(P36, "weight", 0.3)
        s = solve_overlap(P36, "weight", 0.3, 0.3 - 1e-5)
        assert s.t1 < 0.02
        assert s.t2 == pytest.approx(x, abs=0.01)

    def test_residuals_and_positivity(self):
        s = solve_overlap(P36, "weight", 0.3, 0.05)
        r1, r2 = _reduced_residuals(P36, "weight", 0.3, 0.05, s)
        assert r1 < 1e-10 and r2 < 1e-10
        assert s.gf_value > 0.0

    @pytest.mark.parametrize("kind,gf", [("weight", pair_gf_weight),
                                         ("stopping", pair_gf_stop)])
    def test_gf_value_consistent(self, kind, gf):
        s = solve_overlap(P36, kind, 0.3, 0.11)
        assert s.gf_value == pytest.approx(
            gf(P36, (s.t1, s.t2, s.t1)), rel=1e-12)

    def test_alpha_domain_enforced(self):
        with pytest.raises(ValueError):
            solve_overlap(P36, "weight", 0.3, 0.3)
        with pytest.raises(ValueError):
            solve_overlap(P36, "weight", 0.3, 0.0)
        with pytest.raises(ValueError):
            solve_overlap(P36, "weight", 0.7, 0.39)  # below 2w-1

    @pytest.mark.parametrize("kind", ["weight", "stopping"])
    @pytest.mark.parametrize(
        "params", [EnsembleParams(3, 4), EnsembleParams(3, 6),
                   EnsembleParams(6, 8), EnsembleParams(6, 12),
                   EnsembleParams(12, 24)])
    def test_square_overlap_identity_across_ensembles(self, kind, params):
        wmin = min_abscissa(params, kind)
        for omega in (wmin + 0.02, 0.3, 0.45):
            if growth_rate(params, kind, omega) <= 0:
                continue
            x = solve_saddle(params, kind, omega)
            s = solve_overlap(params, kind, omega, omega * omega)
            assert s.t1 == pytest.approx(x, abs=1e-9)
            assert s.t2 == pytest.approx(x * x, abs=1e-9)
            # the pair function collapses to the squared single-check GF
            phi = pair_gf_weight if kind == "weight" else pair_gf_stop
            single = phi(params, (x, x * x, x))
            assert s.gf_value == pytest.approx(single, rel=1e-12)

    def test_b_matrix_positive_definite_and_sigma_positive(self):
        for alpha in (0.05, 0.09, 0.2, 0.28):
            s = solve_overlap(P36, "weight", 0.3, alpha)
            np.linalg.cholesky(s.b_matrix)  # raises if not pd
            assert s.sigma_c2 > 0.0


class TestStationarity:
    @pytest.mark.parametrize("params,omega", [(P36, 0.3), (P34, 0.25)])
    def test_square_overlap_is_stationary(self, params, omega):
        assert abs(stationarity_residual(
            params, "weight", omega, omega * omega)) < 1e-8

    def test_sign_change_across_square_overlap(self):
        lo = stationarity_residual(P36, "weight", 0.3, 0.09 - 1e-3)
        hi = stationarity_residual(P36, "weight", 0.3, 0.09 + 1e-3)
        assert lo > 0.0 > hi

    def test_fine_grid_sign_pattern(self):
        alphas = np.linspace(0.05, 0.13, 17)
        signs = [math.copysign(1.0, stationarity_residual(
            P36, "weight", 0.3, float(a))) for a in alphas]
        flips = sum(s1 != s2 for s1, s2 in zip(signs, signs[1:]))
        assert flips == 1  # exactly one crossing in this window: at 0.09


class TestExponentCurve:
    def test_peak_identity(self):
        peak = exponent_curve(P36, "weight", 0.3, 0.09)
        assert peak == pytest.approx(
            2.0 * growth_rate(P36, "weight", 0.3), abs=1e-8)

    def test_diagonal_limit(self):
        val = exponent_curve(P36, "weight", 0.3, 0.3 - 1e-4)
        assert val == pytest.approx(
            growth_rate(P36, "weight", 0.3), abs=1e-3)

    def test_square_overlap_dominates_grid(self):
        peak = exponent_curve(P36, "weight", 0.3, 0.09)
        for alpha in np.linspace(1e-3, 0.3 - 1e-3, 51):
            if abs(alpha - 0.09) < 1e-6:
                continue
            assert exponent_curve(P36, "weight", 0.3, float(alpha)) < peak


class TestEndpoint:
    def test_below_twice_growth(self):
        assert (endpoint_exponent(P36, "weight", 0.3)
                < 2.0 * growth_rate(P36, "weight", 0.3))

    def test_methods_agree(self):
        sad = endpoint_exponent(P36, "weight", 0.3, method="saddle")
        ext = endpoint_exponent(P36, "weight", 0.3, method="extrapolate")
        assert sad == pytest.approx(ext, abs=1e-3)

    def test_exact_disjoint_term_growth_converges(self):
        # at omega=0.5 the saddle path diverges; extrapolation serves it
        endpoint = endpoint_exponent(P36, "weight", 0.5)
        errs = {}
        for n in (24, 48):
            s0 = exactcomb.exact_term(P36, n, n // 2, 0, "weight")
            errs[n] = abs(math.log(s0.numerator / s0.denominator) / n - endpoint)
        assert errs[48] < errs[24]

    def test_stopping_kind(self):
        sad = endpoint_exponent(P36, "stopping", 0.3, method="saddle")
        ext = endpoint_exponent(P36, "stopping", 0.3, method="extrapolate")
        assert sad == pytest.approx(ext, abs=1e-3)


class TestVerifyConditions:
    def test_weight_conditions_hold(self):
        rep = verify_conditions(P36, "weight", 0.3)
        assert rep.condition1_ok and rep.condition2_ok

    def test_half_abscissa_34(self):
        rep = verify_conditions(P34, "weight", 0.5)
        assert rep.condition1_ok and rep.condition2_ok

    def test_markov_regime_rejected(self):
        with pytest.raises(DomainError):
            verify_conditions(P36, "weight", 0.01)

    def test_stationary_point_found_at_square(self):
        rep = verify_conditions(P36, "weight", 0.3)
        maxima = [p for p in rep.stationary_points if p.is_maximum]
        assert len(maxima) == 1
        assert maxima[0].alpha == pytest.approx(0.09, abs=1e-8)
        assert maxima[0].d2_coefficient < 0.0

    def test_stopping_near_minimum_size_fails_condition1(self):
        # boundary layer of near-identical pairs dominates near s_min
        smin = min_abscissa(P36, "stopping")
        rep = verify_conditions(P36, "stopping", smin + 1e-6)
        assert not rep.condition1_ok

    def test_stopping_moderate_size_passes(self):
        rep = verify_conditions(P36, "stopping", 0.3)
        assert rep.condition1_ok and rep.condition2_ok


class TestDelta:
    def test_half_abscissa_34_is_tight(self):
        rep = delta(P34, "weight", 0.5, 0.95)
        assert rep.delta == pytest.approx(0.0, abs=1e-8)
        assert rep.bound == pytest.approx(1.0, abs=1e-8)

    def test_table_values_at_min_abscissa(self):
        for params, bound in ((P36, 0.740611), (EnsembleParams(6, 8), 0.989098)):
            wmin = min_abscissa(params, "weight")
            rep = delta(params, "weight", wmin + 1e-6, 0.95)
            assert rep.bound == pytest.approx(bound, abs=1e-4)

    def test_delta_never_meaningfully_negative(self):
        for omega in np.linspace(0.15, 0.85, 15):
            val = delta_value(P34, "weight", float(omega))
            assert val >= -1e-9

    def test_condition_failure_leaves_report_empty(self):
        smin = min_abscissa(P36, "stopping")
        rep = delta(P36, "stopping", smin + 1e-6, 0.95)
        assert not rep.condition1_ok
        assert rep.delta is None and rep.bound is None
        assert rep.diagnostics  # stationary points still reported

    def test_epsilon_validated(self):
        with pytest.raises(ValueError):
            delta(P34, "weight", 0.5, 0.0)


class TestClosedForm34:
    def test_half_is_zero(self):
        assert delta34_closed_form(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_spot_value(self):
        assert delta34_closed_form(0.25) == pytest.approx(0.08059, abs=1e-4)

    def test_matches_pipeline_on_grid(self):
        for k in range(15):
            w = 0.15 + 0.05 * k
            assert delta_value(P34, "weight", w) == pytest.approx(
                delta34_closed_form(w), abs=1e-9)

    def test_domain_guard(self):
        # the radicand stays positive on (0,1), shrinking to 0 at the edges;
        # outside the unit interval the formula is rejected
        with pytest.raises(DomainError):
            delta34_closed_form(1.5)
        with pytest.raises(DomainError):
            delta34_closed_form(0.0)
        assert math.isfinite(delta34_closed_form(0.999))


class TestLocalLimitRatio:
    def test_identity_offset(self):
        assert local_limit_ratio(P36, "weight", 24, 1 / 3, 1 / 6,
                                 (0, 0, 0)) == 1.0

    def test_prediction_accuracy_and_convergence(self):
        offsets = [(-3, 3, -3), (2, 0, 0), (-1, 1, -1)]
        errs = {}
        for n in (24, 48):
            m = n // 2
            W, i0 = n // 3, n // 6
            base = (3 * (W - i0), 3 * i0, 3 * (W - i0))
            pair = exactcomb.expand_pair_gf(P36, "weight")
            idx = [base] + [tuple(base[k] + o[k] for k in range(3))
                            for o in offsets]
            coeffs = exactcomb.power_coefficients(pair, m, idx)
            for o in offsets:
                j = tuple(base[k] + o[k] for k in range(3))
                pred = local_limit_ratio(P36, "weight", n, 1 / 3, 1 / 6, o)
                errs[(n, o)] = abs(pred / (coeffs[j] / coeffs[base]) - 1.0)
        for o in offsets:
            assert errs[(24, o)] < 0.30
            assert errs[(48, o)] < errs[(24, o)]

    def test_mixed_parity_offset_off_lattice(self):
        with pytest.raises(OffLatticeError):
            local_limit_ratio(P36, "weight", 24, 1 / 3, 1 / 6, (1, 0, 0))

    def test_stopping_kind_has_full_lattice(self):
        val = local_limit_ratio(P36, "stopping", 24, 1 / 3, 1 / 6, (1, 0, 0))
        assert val > 0.0


class TestLargeDegreeRobustness:
    def test_full_overlap_range_solvable_at_degree_48(self):
        # corner-adjacent alphas force saddle components ~1e3; the sweep,
        # edge probes and continuation must all hold up
        params = EnsembleParams(24, 48)
        for omega in (0.54, 0.86):
            rep = verify_conditions(params, "weight", omega)
            assert rep.condition1_ok and rep.condition2_ok
        rep = delta(params, "weight", 0.7, 0.95)
        assert rep.bound is not None and 0.99 <= rep.bound <= 1.0


class TestSecondMomentPrefactor:
    @staticmethod
    def _asymptotic_second_moment(params, kind, n, w):
        """Full squared-count approximation including every constant:
        d * sigma_c * r^(3/2) * w(1-w) * e^(2n*growth) /
        (2 pi n sqrt((w^2(1-w)^2 - (l-1) sigma_c^2) |B|)),
        with d = 4 for the parity-constrained codeword pair function, 1 for
        the stopping pair function."""
        from ldpc_moments.secondmoment import _det3, _sigma_c2, _tri_stats
        l, r = params.left_degree, params.right_degree
        x = solve_saddle(params, kind, w)
        _, _, _, B = _tri_stats(params, kind, x, x * x)
        sc2 = _sigma_c2(params, B)
        core = w ** 2 * (1 - w) ** 2 - (l - 1) * sc2
        d = 4.0 if kind == "weight" else 1.0
        return (d * math.sqrt(sc2) * r ** 1.5 * w * (1 - w)
                * math.exp(2 * n * growth_rate(params, kind, w))
                / (2 * math.pi * n * math.sqrt(core * _det3(B))))

    @pytest.mark.parametrize("kind,tol12,tol24", [("weight", 0.06, 0.01),
                                                  ("stopping", 0.03, 0.02)])
    def test_matches_exact_sum_with_constants(self, kind, tol12, tol24):
        # validates the whole chain: lattice factor, sigma_c, |B|, r^(3/2)
        params = P36
        w = 1.0 / 3.0
        errs = {}
        for n in (12, 24):
            exact = float(exactcomb.exact_second_moment(params, n, n // 3, kind))
            approx = self._asymptotic_second_moment(params, kind, n, w)
            errs[n] = abs(approx / exact - 1.0)
        assert errs[12] < tol12
        assert errs[24] < tol24
        assert errs[24] < errs[12]


class TestSigmaCurvatureCrossCheck:
    def test_second_difference_of_exact_coefficients(self):
        # discrete curvature of ln C_i near i = n w^2 vs -1/(n sigma_c^2)
        pair = exactcomb.expand_pair_gf(P36, "weight")
        w = 1.0 / 3.0
        rel = {}
        for n in (48, 96):
            W = n // 3
            i0 = round(n * w * w)
            s = solve_overlap(P36, "weight", w, i0 / n)
            idx = [(3 * (W - i), 3 * i, 3 * (W - i)) for i in
                   (i0 - 1, i0, i0 + 1)]
            coeffs = exactcomb.power_coefficients(pair, n // 2, idx)
            lnc = [math.log(coeffs[ix]) for ix in idx]
            d2 = lnc[2] - 2.0 * lnc[1] + lnc[0]
            rel[n] = abs(d2 / (-1.0 / (n * s.sigma_c2)) - 1.0)
        assert rel[48] < 0.20
        assert rel[96] < rel[48]
