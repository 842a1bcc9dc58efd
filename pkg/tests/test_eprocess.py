from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admissibility.bernoulli import JEFFREYS, LAPLACE
from admissibility.decision_core import DomainError
from admissibility.eprocess import (
    EProcessState,
    eprocess_martingale_deviation,
    eprocess_update,
    naive_peeking_test,
    path_trace,
    run_eprocess,
    run_table3,
    table3_report,
    ville_reject,
)
from admissibility.harness import ExperimentConfig


def _exact_path(xs, theta0, a=Fraction(1, 2), b=Fraction(1, 2)):
    """Rational-arithmetic oracle for the product of likelihood ratios."""
    th = Fraction(theta0)
    e, s = Fraction(1), 0
    values = [e]
    for t, x in enumerate(xs):
        p = (s + a) / (t + a + b)
        e *= p / th if x else (1 - p) / (1 - th)
        s += x
        values.append(e)
    return values


class TestUpdates:
    def test_hand_values(self):
        states = run_eprocess([1, 1], 0.5)
        assert states[2].value == pytest.approx(1.5, abs=1e-15)
        fresh = eprocess_update(EProcessState(0.3), 1)
        assert fresh.value == pytest.approx(5 / 3, abs=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 1), max_size=40), st.sampled_from(["0.5", "0.3", "0.8"]))
    def test_matches_rational_oracle(self, xs, theta0):
        got = [st_.value for st_ in run_eprocess(xs, float(theta0))]
        want = _exact_path(xs, Fraction(theta0))
        assert got == pytest.approx([float(v) for v in want], rel=1e-12)

    def test_rejects_bad_outcome(self):
        with pytest.raises(DomainError):
            eprocess_update(EProcessState(0.5), 2)

    def test_null_in_open_interval(self):
        with pytest.raises(DomainError):
            EProcessState(1.0)

    @pytest.mark.parametrize("pred", [JEFFREYS, LAPLACE])
    def test_martingale_identity(self, pred):
        assert eprocess_martingale_deviation(0.5, 60, pred) < 1e-14
        assert eprocess_martingale_deviation(0.2, 60, pred) < 1e-14


class TestVille:
    def test_threshold_inclusive(self):
        assert ville_reject(EProcessState.with_value(20.0), 0.05)
        assert not ville_reject(EProcessState.with_value(19.99), 0.05)

    def test_exact_crossing_probability_bounded(self):
        # enumerate every null path of length 14
        horizon, alpha = 14, 0.1
        crossed = Fraction(0)
        for xs in itertools.product((0, 1), repeat=horizon):
            if max(_exact_path(xs, Fraction(1, 2))) >= 1 / Fraction(alpha):
                crossed += Fraction(1, 2**horizon)
        assert 0 < crossed <= alpha

    def test_alpha_validated(self):
        with pytest.raises(DomainError):
            ville_reject(EProcessState(0.5), 1.0)


class TestNaivePeeking:
    def test_hand_z(self):
        # S_10 = 8 gives z = 1.897 < 1.96
        assert not naive_peeking_test([1] * 8 + [0] * 2, [10])
        assert naive_peeking_test([1] * 9 + [0], [10])

    def test_any_look_rejects(self):
        xs = [1] * 10 + [0] * 10
        assert naive_peeking_test(xs, [10, 20])
        assert not naive_peeking_test(xs, [20])

    @pytest.mark.parametrize("looks", [[], [0], [5, 5], [30]])
    def test_bad_looks(self, looks):
        with pytest.raises(DomainError):
            naive_peeking_test([0] * 20, looks)


class TestTable3:
    def test_frozen_regression(self):
        res = run_table3(ExperimentConfig(reps=2000, theta=0.5))
        assert res.eprocess_rate == 0.026
        assert res.naive_rate == 0.1735

    def test_looks_only_is_conservative(self):
        cont = run_table3(ExperimentConfig(reps=2000))
        looks = run_table3(ExperimentConfig(reps=2000, monitor_looks_only=True))
        assert looks.eprocess_rate <= cont.eprocess_rate
        assert looks.naive_rate == cont.naive_rate

    def test_eprocess_below_alpha(self):
        res = run_table3(ExperimentConfig(reps=2000))
        assert res.eprocess_rate <= 0.05 + 3 * res.eprocess_se
        assert res.naive_rate > 0.1

    def test_scan_matches_scalar_path(self):
        cfg = ExperimentConfig(reps=3, horizon=50, looks=(10, 50))
        from admissibility.eprocess import simulate_null_paths
        from admissibility import kernels

        xs = simulate_null_paths(cfg)
        log_final, _, _ = kernels.eprocess_scan(xs, 0.5, 0.5, 0.5, math.log(20.0), np.ones(50, np.uint8))
        for r in range(3):
            assert log_final[r] == pytest.approx(run_eprocess(xs[r], 0.5)[-1].log_value, abs=1e-12)

    def test_report(self):
        table = table3_report(ExperimentConfig(reps=50))
        assert [row[0] for row in table.rows] == ["eprocess", "naive_peeking", "nominal"]

    def test_path_trace(self):
        table = path_trace([1, 1])
        assert table.rows[-1] == [2, pytest.approx(1.5)]
