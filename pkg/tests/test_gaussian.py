from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from admissibility.decision_core import DomainError
from admissibility.gaussian import (
    GaussianEProcessState,
    GaussianModel,
    crossing_distance,
    eprocess_quadrature_deviation,
    factor_expectation,
    gaussian_conformal_interval,
    gaussian_eprocess_update,
    gaussian_ville_mc,
    interval_point_risk,
    mc_interval_coverage,
    mc_sample_mean_risk,
    sample_mean_risk,
    separation_json,
    separation_report,
    shrinkage_estimate,
    shrinkage_risk,
)
from admissibility.harness import ExperimentConfig, derive_substream

UNIT = GaussianModel()


class TestRisks:
    def test_hand_values(self):
        assert shrinkage_estimate(UNIT, 2.0, 1) == 1.0
        assert shrinkage_risk(UNIT, 2.0, 1) == 1.25
        assert sample_mean_risk(UNIT, 4) == 0.25

    def test_crossing_distance_by_root_finding(self):
        for n in (1, 5, 10, 50):
            root = optimize.brentq(lambda d: shrinkage_risk(UNIT, d, n) - 1.0 / n, 0.0, 50.0, xtol=1e-14)
            assert crossing_distance(UNIT, n) == pytest.approx(root, abs=1e-10)
        assert crossing_distance(UNIT, 10) == pytest.approx(math.sqrt(2.1), abs=1e-15)

    @given(st.floats(0.1, 5), st.floats(-3, 3), st.floats(0.1, 5), st.integers(1, 100))
    def test_shrinkage_beats_mean_inside_crossing(self, sigma, mu0, tau, n):
        model = GaussianModel(sigma, mu0, tau)
        d = crossing_distance(model, n)
        assert shrinkage_risk(model, mu0 + 0.5 * d, n) < sample_mean_risk(model, n)
        assert shrinkage_risk(model, mu0 + 2.0 * d, n) > sample_mean_risk(model, n)

    def test_validation(self):
        with pytest.raises(DomainError):
            GaussianModel(sigma=0.0)
        with pytest.raises(DomainError):
            sample_mean_risk(UNIT, 0)

    def test_mc_mean_risk(self):
        stat = mc_sample_mean_risk(UNIT, 1.5, 10, 4000, seed=11)
        assert abs(stat.mean - 0.1) <= 4 * stat.mc_standard_error


class TestEProcess:
    def test_first_factor(self):
        st0 = GaussianEProcessState()
        st1 = gaussian_eprocess_update(st0, 1.0, UNIT)
        # plug-in is mu0 before data, so the first factor is 1
        assert st1.value == 1.0
        assert st1.mu_hat(UNIT) == 0.5

    def test_unit_expectation(self):
        assert eprocess_quadrature_deviation(UNIT) < 1e-10
        assert factor_expectation(2.0, GaussianModel(2.0, 1.0, 0.5)) == pytest.approx(1.0, abs=1e-10)

    def test_kernel_matches_scalar(self):
        from admissibility import kernels

        xs = derive_substream(1, 0).standard_normal((2, 30))
        log_final, _, _ = kernels.gaussian_eprocess_scan(xs, 0.0, 1.0, 1.0, math.log(20))
        for r in range(2):
            s = GaussianEProcessState()
            for x in xs[r]:
                s = gaussian_eprocess_update(s, float(x), UNIT)
            assert log_final[r] == pytest.approx(s.log_value, abs=1e-12)

    def test_ville(self):
        res = gaussian_ville_mc(UNIT, 100, 2000, seed=3, alpha=0.05)
        assert res.crossing_rate <= 0.05
        with pytest.raises(DomainError):
            gaussian_ville_mc(UNIT, 10, 10, 0, alpha=0.0)


class TestInterval:
    def test_interval_from_residuals(self):
        iv = gaussian_conformal_interval([-3.0, 1.0, 2.0], 10.0, 0.25)
        assert (iv.lower, iv.upper) == (7.0, 13.0)

    def test_coverage(self):
        res = mc_interval_coverage(UNIT, 0.0, 10, 50, 0.1, 2000, seed=4)
        assert res.coverage >= 0.9 - 3 * res.se

    def test_point_risk_formula_by_mc(self):
        n, q = 10, 1.7
        rng = derive_substream(8, 0)
        err = np.abs(rng.standard_normal(400_000) / math.sqrt(n)) + q
        assert interval_point_risk(UNIT, n, q) == pytest.approx(np.mean(err**2), rel=3e-3)
        assert interval_point_risk(UNIT, n, 0.0) == sample_mean_risk(UNIT, n)


class TestSeparation:
    def test_all_checks_pass(self):
        checks = separation_report(UNIT, ExperimentConfig(reps=1000), coverage_reps=500)
        assert [c.name for c in checks] == [
            "sample_mean_blackwell_only",
            "eprocess_av_only",
            "interval_coverage_only",
        ]
        assert all(c.passed for c in checks)
        payload = separation_json(checks)
        assert payload["eprocess_av_only"]["crossing_distance"] == pytest.approx(math.sqrt(2.1))
