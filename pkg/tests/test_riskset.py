from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admissibility.decision_core import INF, DomainError, FiniteParamSpace, Prior, dominates
from admissibility.riskset import (
    PredictiveRule,
    RandomizedRule,
    bayes_rule_for_prior,
    boundary_gap,
    check_hyperplane_support,
    exact_risk,
    mixture_exact_risk,
    random_rules,
    risk_vector,
    shadow_price_error,
    trace_lower_boundary,
)

SPACE = FiniteParamSpace((0.3, 0.7))

# mpmath oracle, 40 digits: Jeffreys and Laplace rules at n = 10 on {0.3, 0.7}.
JEFFREYS_N10 = 0.6585827068199976
LAPLACE_N10 = 0.6487022443855507
# n = 1, forecasts (1/4, 3/4) at theta = 1/2.
BAYES_N1_HALF = 0.8369882167858358


def _brute_risk(probs, theta):
    n = len(probs) - 1
    return math.fsum(
        math.comb(n, s) * theta**s * (1 - theta) ** (n - s)
        * (-theta * math.log(p) - (1 - theta) * math.log(1 - p))
        for s, p in enumerate(probs)
    )


class TestPredictiveRule:
    def test_conjugate_probs(self):
        rule = PredictiveRule.conjugate(2, 0.5, 0.5)
        assert rule.probs == (0.5 / 3, 1.5 / 3, 2.5 / 3)
        assert rule.is_symmetric

    def test_wrong_length(self):
        with pytest.raises(DomainError):
            PredictiveRule(3, (0.5, 0.5))

    def test_plugin_requires_data(self):
        with pytest.raises(DomainError):
            PredictiveRule.plugin(0)

    def test_forecasts_in_unit_interval(self):
        with pytest.raises(DomainError):
            PredictiveRule(0, (1.2,))


class TestExactRisk:
    def test_frozen_values(self):
        assert exact_risk(PredictiveRule.conjugate(10, 0.5, 0.5), 0.3) == pytest.approx(JEFFREYS_N10, abs=1e-14)
        assert exact_risk(PredictiveRule.conjugate(10, 1, 1), 0.7) == pytest.approx(LAPLACE_N10, abs=1e-14)
        assert exact_risk(PredictiveRule(1, (0.25, 0.75)), 0.5) == pytest.approx(BAYES_N1_HALF, abs=1e-15)

    def test_plugin_is_infinite(self):
        assert exact_risk(PredictiveRule.plugin(10), 0.3) == INF

    def test_theta_domain(self):
        with pytest.raises(DomainError):
            exact_risk(PredictiveRule.constant(3, 0.5), 0.0)

    @settings(max_examples=50, deadline=None)
    @given(
        st.integers(0, 12),
        st.floats(0.05, 0.95),
        st.lists(st.floats(0.01, 0.99), min_size=13, max_size=13),
    )
    def test_matches_direct_sum(self, n, theta, raw):
        probs = raw[: n + 1]
        assert exact_risk(PredictiveRule(n, tuple(probs)), theta) == pytest.approx(
            _brute_risk(probs, theta), rel=1e-12
        )

    def test_symmetric_rule_has_symmetric_risk(self):
        r = risk_vector(PredictiveRule.conjugate(10, 0.5, 0.5), SPACE)
        assert r[0] == pytest.approx(r[1], abs=1e-15)


class TestBayesRule:
    def test_posterior_mean_n1(self):
        rule = bayes_rule_for_prior(Prior((0.5, 0.5)), SPACE, 1)
        # P(theta = 0.7 | x = 1) = 0.7, so forecast 0.3*0.3 + 0.7*0.7
        assert rule.probs[1] == pytest.approx(0.58, abs=1e-15)
        assert rule.probs[0] == pytest.approx(0.42, abs=1e-15)

    def test_point_mass_prior_is_constant(self):
        rule = bayes_rule_for_prior(Prior((1.0, 0.0)), SPACE, 5)
        assert rule.probs == (0.3,) * 6

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.01, 0.99), st.integers(0, 10), st.integers(0, 2**31))
    def test_hyperplane_support(self, w, n, seed):
        rng = np.random.default_rng(seed)
        report = check_hyperplane_support(Prior((w, 1 - w)), SPACE, n, random_rules(n, 20, rng))
        assert report.holds

    def test_infinite_candidates_counted(self):
        report = check_hyperplane_support(Prior((0.5, 0.5)), SPACE, 4, [PredictiveRule.plugin(4)])
        assert report.n_infinite == 1 and report.holds


class TestRandomizedRule:
    def test_mixture_risk_is_affine(self):
        a = PredictiveRule.conjugate(5, 0.5, 0.5)
        b = PredictiveRule.conjugate(5, 2, 2)
        mix = RandomizedRule((a, b), (0.25, 0.75))
        assert mixture_exact_risk(mix, 0.3) == pytest.approx(
            0.25 * exact_risk(a, 0.3) + 0.75 * exact_risk(b, 0.3), rel=1e-13
        )

    def test_mixture_with_extreme_component(self):
        mix = RandomizedRule((PredictiveRule.plugin(3), PredictiveRule.constant(3, 0.5)), (0.5, 0.5))
        assert mixture_exact_risk(mix, 0.3) == INF

    def test_weights_validated(self):
        a = PredictiveRule.constant(2, 0.5)
        with pytest.raises(ValueError):
            RandomizedRule((a, a), (0.7, 0.7))


@pytest.fixture(scope="module")
def trace():
    return trace_lower_boundary(SPACE, 10, 201)


class TestBoundary:
    def test_endpoints(self, trace):
        # all weight on 0.7 forecasts 0.7 regardless of data
        first = trace.risks[0]
        assert first[1] == pytest.approx(0.6108643020548935, abs=1e-15)
        assert first[0] == pytest.approx(0.9497834462097749, abs=1e-14)

    def test_monotone_tradeoff(self, trace):
        r = trace.risks
        assert np.all(np.diff(r[:, 0]) <= 1e-15)
        assert np.all(np.diff(r[:, 1]) >= -1e-15)

    def test_no_boundary_point_dominates_another(self, trace):
        r = trace.risks
        for i in range(0, len(r), 20):
            for j in range(0, len(r), 20):
                assert not dominates(r[i], r[j]) or np.allclose(r[i], r[j], atol=1e-13)

    def test_shadow_price_converges(self, trace):
        # central differences: error shrinks like the squared grid step
        coarse = shadow_price_error(trace)
        fine = shadow_price_error(trace_lower_boundary(SPACE, 10, 1001))
        assert coarse < 1e-2
        assert fine < coarse / 15

    def test_gap_of_bayes_rule_is_zero(self, trace):
        assert boundary_gap(trace.rule_at(100), trace) == pytest.approx(0.0, abs=1e-14)

    def test_gap_of_plugin_is_infinite(self, trace):
        assert boundary_gap(PredictiveRule.plugin(10), trace) == INF

    def test_jeffreys_gap_small_but_positive(self, trace):
        gap = boundary_gap(PredictiveRule.conjugate(10, 0.5, 0.5), trace)
        assert 0.0 < gap < 0.05

    def test_requires_two_points(self):
        with pytest.raises(DomainError):
            trace_lower_boundary(FiniteParamSpace((0.2, 0.5, 0.8)), 3)

    def test_table_shape(self, trace):
        table = trace.to_table([PredictiveRule.plugin(10)])
        assert len(table.rows) == 202
        assert table.rows[-1][3] == INF
