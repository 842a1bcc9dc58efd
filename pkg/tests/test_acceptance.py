"""Acceptance gate: every criterion at its stated tolerance, one line each.

Nothing here relaxes a tolerance.  A criterion that cannot be met with a
faithful implementation fails and is reported as such.
"""

from __future__ import annotations

import pytest

from admissibility import acceptance
from admissibility.harness import ExperimentConfig

RESULTS: list[acceptance.CriterionResult] = []


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.CRITERIA[number](ExperimentConfig())
    RESULTS.append(result)
    print(result.line())
    for note in result.notes:
        print(f"    note: {note}")
    assert result.passed, result.line() + "".join(f"\n  note: {n}" for n in result.notes)


def test_hand_oracle_matches_exact_risk():
    from admissibility.bernoulli import JEFFREYS
    from admissibility.riskset import exact_risk

    assert acceptance.hand_bayes_risk_n5() == pytest.approx(exact_risk(JEFFREYS.rule(5), 0.3), abs=1e-15)
