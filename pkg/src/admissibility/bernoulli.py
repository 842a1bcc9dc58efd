"""Bayes, Laplace and plug-in forecasters for Bernoulli data, and the log-loss
reproduction comparing them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decision_core import DomainError, binary_entropy
from .harness import ExperimentConfig, Table, derive_substream, summarize
from .riskset import PredictiveRule, exact_risk


@dataclass(frozen=True)
class ConjugatePredictor:
    """Beta(a, b) posterior predictive ``(s + a) / (n + a + b)``."""

    a: float = 0.5
    b: float = 0.5

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta parameters must be positive, got ({self.a}, {self.b})")

    def rule(self, n: int) -> PredictiveRule:
        return PredictiveRule.conjugate(n, self.a, self.b)


JEFFREYS = ConjugatePredictor(0.5, 0.5)
LAPLACE = ConjugatePredictor(1.0, 1.0)


def conjugate_predict(pred: ConjugatePredictor, s: int, n: int) -> float:
    if not 0 <= s <= n:
        raise DomainError(f"need 0 <= s <= n, got s={s}, n={n}")
    return (s + pred.a) / (n + pred.a + pred.b)


def plugin_predict(s: int, n: int) -> float:
    if n < 1:
        raise DomainError("plug-in forecast is undefined before any data")
    if not 0 <= s <= n:
        raise DomainError(f"need 0 <= s <= n, got s={s}, n={n}")
    return s / n


def bayes_martingale_deviation(pred: ConjugatePredictor, n_max: int) -> float:
    """Largest one-step martingale defect of the predictive over ``n < n_max``.

    The next outcome is drawn from the current forecast (prior predictive
    law), so the defect at node ``(s, n)`` is
    ``|p * p(s+1, n+1) + (1 - p) * p(s, n+1) - p(s, n)|``.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    worst = 0.0
    for n in range(n_max):
        for s in range(n + 1):
            p = conjugate_predict(pred, s, n)
            nxt = p * conjugate_predict(pred, s + 1, n + 1) + (1 - p) * conjugate_predict(pred, s, n + 1)
            worst = max(worst, abs(nxt - p))
    return worst


def plugin_self_martingale_deviation(n_max: int) -> float:
    """Same defect for ``s/n`` under its own predictive law, over ``1 <= n < n_max``."""
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    worst = 0.0
    for n in range(1, n_max):
        for s in range(n + 1):
            p = s / n
            nxt = p * (s + 1) / (n + 1) + (1 - p) * s / (n + 1)
            worst = max(worst, abs(nxt - p))
    return worst


@dataclass(frozen=True)
class DominanceCertificate:
    n: int
    thetas: tuple[float, ...]
    plugin_risks: tuple[float, ...]
    bayes_risks: tuple[float, ...]

    @property
    def dominated(self) -> bool:
        return all(
            math.isinf(p) and math.isfinite(b) for p, b in zip(self.plugin_risks, self.bayes_risks)
        )


def dominance_certificate(
    n: int, theta_grid, pred: ConjugatePredictor = JEFFREYS
) -> DominanceCertificate:
    """Exact risks of plug-in and Bayes rules at every grid point."""
    thetas = tuple(float(t) for t in theta_grid)
    if not all(0 < t < 1 for t in thetas):
        raise DomainError("theta grid must lie in (0, 1)")
    plug, bayes = PredictiveRule.plugin(n), pred.rule(n)
    return DominanceCertificate(
        n,
        thetas,
        tuple(exact_risk(plug, t) for t in thetas),
        tuple(exact_risk(bayes, t) for t in thetas),
    )


def boundary_fraction_exact(n: int, theta: float) -> float:
    """P(S_n in {0, n})."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0 < theta < 1:
        raise DomainError("theta must lie in (0, 1)")
    return theta**n + (1 - theta) ** n


@dataclass(frozen=True)
class Table2Row:
    n: int
    bayes_risk_mc: float
    bayes_risk_se: float
    mle_risk_mc_clamped: float
    mle_risk_se: float
    excess: float
    boundary_fraction_mc: float
    bayes_risk_exact: float
    mle_risk_exact: float
    boundary_fraction_exact: float


TABLE2_COLUMNS = [
    "n",
    "bayes_risk_mc",
    "bayes_risk_se",
    "mle_risk_mc_clamped",
    "mle_risk_se",
    "excess",
    "boundary_fraction_mc",
    "bayes_risk_exact",
    "mle_risk_exact",
    "boundary_fraction_exact",
]


def _expected_loss(theta: float, p: np.ndarray) -> np.ndarray:
    return -theta * np.log(p) - (1 - theta) * np.log1p(-p)


def run_table2(config: ExperimentConfig, pred: ConjugatePredictor = JEFFREYS) -> list[Table2Row]:
    """Average next-step log loss of Bayes and clamped plug-in forecasts.

    Each replication draws one sequence of length ``max(n_list)`` and reads
    every ``n`` off its prefix counts.  The loss recorded is the expected
    loss ``L(theta, forecast)`` rather than the realised log score.
    """
    theta, eps = config.theta, config.clamp_eps
    if not 0 < eps < 0.5:
        raise DomainError("clamp_eps must lie in (0, 0.5)")
    n_list = tuple(sorted(config.n_list))
    n_max = n_list[-1]
    counts = np.empty((config.reps, len(n_list)), dtype=np.int64)
    idx = np.asarray(n_list) - 1
    for r in range(config.reps):
        xs = derive_substream(config.seed, r).random(n_max) < theta
        counts[r] = np.cumsum(xs)[idx]

    rows = []
    for j, n in enumerate(n_list):
        s = counts[:, j]
        bayes_p = (s + pred.a) / (n + pred.a + pred.b)
        mle_p = np.clip(s / n, eps, 1 - eps)
        bayes = summarize(_expected_loss(theta, bayes_p))
        mle = summarize(_expected_loss(theta, mle_p))
        rows.append(
            Table2Row(
                n=n,
                bayes_risk_mc=bayes.mean,
                bayes_risk_se=bayes.mc_standard_error,
                mle_risk_mc_clamped=mle.mean,
                mle_risk_se=mle.mc_standard_error,
                excess=mle.mean - bayes.mean,
                boundary_fraction_mc=float(np.mean((s == 0) | (s == n))),
                bayes_risk_exact=exact_risk(pred.rule(n), theta),
                mle_risk_exact=exact_risk(PredictiveRule.plugin(n), theta),
                boundary_fraction_exact=boundary_fraction_exact(n, theta),
            )
        )
    return rows


def table2_report(config: ExperimentConfig) -> Table:
    rows = run_table2(config)
    table = Table(TABLE2_COLUMNS, meta={**config.as_dict(), "experiment": "table2"})
    for row in rows:
        table.rows.append([getattr(row, c) for c in TABLE2_COLUMNS])
    return table


def entropy_floor(theta: float) -> float:
    """Smallest achievable expected log loss; every rule's risk is at least this."""
    return binary_entropy(theta)
