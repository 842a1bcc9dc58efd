"""Split-conformal intervals, the covariate-shift reproduction, and a
full-conformal set for a binary label with exact coverage enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special
from scipy.stats import betabinom, binom

from .bernoulli import JEFFREYS, ConjugatePredictor, conjugate_predict
from .decision_core import INF, DomainError
from .harness import ExperimentConfig, Table, derive_substream, stable_sum


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def conformal_rank(n: int, alpha: float) -> int:
    """1-based order-statistic index ``ceil((n + 1)(1 - alpha))``."""
    _check_alpha(alpha)
    # guard against products like 10 * 0.9 == 9.000000000000002
    return math.ceil((n + 1) * (1.0 - alpha) - 1e-9)


@dataclass(frozen=True)
class ConformalCalibration:
    quantile: float
    n_cal: int
    alpha: float


def calibrate(scores: Sequence[float], alpha: float) -> ConformalCalibration:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise DomainError("calibration needs at least one score")
    if np.any(arr < 0) or np.isnan(arr).any():
        raise DomainError("nonconformity scores must be nonnegative")
    k = conformal_rank(arr.size, alpha)
    if k > arr.size:
        return ConformalCalibration(INF, int(arr.size), alpha)
    q = float(np.partition(arr, k - 1)[k - 1])
    return ConformalCalibration(q, int(arr.size), alpha)


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    @property
    def half_width(self) -> float:
        return (self.upper - self.lower) / 2.0

    @property
    def center(self) -> float:
        return (self.upper + self.lower) / 2.0

    def contains(self, y: float) -> bool:
        return self.lower <= y <= self.upper


def predict_interval(calib: ConformalCalibration, center: float = 0.0) -> Interval:
    """``{y : |y - center| <= q}``."""
    return Interval(center - calib.quantile, center + calib.quantile)


# --- covariate-shift experiment ----------------------------------------------

DESIGNS = ("uniform", "beta25")


def sample_design(tag: str, u: np.ndarray) -> np.ndarray:
    """Map uniforms to design points by inverse CDF."""
    if tag == "uniform":
        return u
    if tag == "beta25":
        return special.betaincinv(2.0, 5.0, u)
    raise DomainError(f"unknown design {tag!r}; expected one of {DESIGNS}")


@dataclass(frozen=True)
class ShiftScenario:
    name: str
    cal_design: str
    test_design: str

    def __post_init__(self) -> None:
        for tag in (self.cal_design, self.test_design):
            if tag not in DESIGNS:
                raise DomainError(f"unknown design {tag!r}")


SCENARIOS = {
    "A": ShiftScenario("A", "uniform", "uniform"),
    "B": ShiftScenario("B", "uniform", "beta25"),
    "C": ShiftScenario("C", "beta25", "beta25"),
}


@dataclass(frozen=True)
class Table4Result:
    scenario: str
    quantile: float
    coverage: float
    coverage_se: float
    half_width: float
    reps: int
    seed: int


def run_table4(scenario: ShiftScenario, config: ExperimentConfig) -> Table4Result:
    """Split-conformal calibration with score ``|y|`` and heteroscedastic noise.

    ``Y | X = x ~ N(0, (1 + x)^2)``.  Within a replication the draw order is
    fixed (calibration uniforms, calibration normals, test uniforms, test
    normals), so scenarios sharing a calibration design share calibration
    samples under the same seed.
    """
    _check_alpha(config.alpha)
    quantiles = np.empty(config.reps)
    coverages = np.empty(config.reps)
    for r in range(config.reps):
        rng = derive_substream(config.seed, r)
        u_cal = rng.random(config.n_cal)
        z_cal = rng.standard_normal(config.n_cal)
        u_test = rng.random(config.n_test)
        z_test = rng.standard_normal(config.n_test)
        y_cal = (1.0 + sample_design(scenario.cal_design, u_cal)) * z_cal
        y_test = (1.0 + sample_design(scenario.test_design, u_test)) * z_test
        q = calibrate(np.abs(y_cal), config.alpha).quantile
        quantiles[r] = q
        coverages[r] = np.count_nonzero(np.abs(y_test) <= q) / config.n_test
    mean_q = stable_sum(quantiles.tolist()) / config.reps
    mean_cov = stable_sum(coverages.tolist()) / config.reps
    se = float(np.std(coverages, ddof=1) / math.sqrt(config.reps)) if config.reps > 1 else 0.0
    return Table4Result(scenario.name, mean_q, mean_cov, se, mean_q, config.reps, config.seed)


def table4_report(config: ExperimentConfig, scenarios: Sequence[str] = ("A", "B", "C")) -> Table:
    table = Table(
        ["scenario", "quantile", "coverage", "coverage_se", "half_width", "B", "seed"],
        meta={**config.as_dict(), "experiment": "table4"},
    )
    for name in scenarios:
        res = run_table4(SCENARIOS[name], config)
        table.rows.append(
            [res.scenario, res.quantile, res.coverage, res.coverage_se, res.half_width, res.reps, res.seed]
        )
    return table


# --- binary full-conformal set -----------------------------------------------

@dataclass(frozen=True)
class BinaryConformalSet:
    labels: frozenset[int]
    thresholds: dict[int, float]
    scores: dict[int, float]

    def __contains__(self, y: int) -> bool:
        return y in self.labels


def binary_conformal_set(s: int, n: int, alpha: float) -> BinaryConformalSet:
    """Full-conformal set for the next binary outcome after ``s`` of ``n``.

    For each candidate ``y`` the sample is augmented with ``y``; the score
    of every point is its distance to the augmented success frequency
    ``(s + y)/(n + 1)``.  ``y`` is kept when its score is at most the
    ``ceil((n + 1)(1 - alpha))``-th smallest augmented score, so ties keep
    the label.  All comparisons are on integer numerators over ``n + 1``.
    """
    if n < 1:
        raise DomainError("need at least one observation")
    if not 0 <= s <= n:
        raise DomainError(f"need 0 <= s <= n, got s={s}, n={n}")
    k = conformal_rank(n, alpha)  # rank among the n + 1 augmented scores
    labels, thresholds, scores = set(), {}, {}
    for y in (0, 1):
        ones = s + y
        zeros = n + 1 - ones
        one_score, zero_score = zeros, ones  # numerators of |1 - pbar|, |0 - pbar|
        augmented = sorted([one_score] * ones + [zero_score] * zeros)
        test_score = one_score if y == 1 else zero_score
        if k > n + 1:
            cut = math.inf
        else:
            cut = augmented[k - 1]
        if test_score <= cut:
            labels.add(y)
        thresholds[y] = cut / (n + 1) if math.isfinite(cut) else INF
        scores[y] = test_score / (n + 1)
    return BinaryConformalSet(frozenset(labels), thresholds, scores)


MAX_ENUMERATION_N = 20


def exact_binary_coverage(n: int, theta: float, alpha: float) -> float:
    """Exact ``P(Y_{n+1} in C)`` under i.i.d. Bernoulli(theta)."""
    if n > MAX_ENUMERATION_N:
        raise DomainError(f"exact enumeration is limited to n <= {MAX_ENUMERATION_N}")
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    return exact_set_coverage(binary_conformal_set, n, theta, alpha)


# --- constrained-Bayes prediction set ----------------------------------------

def constrained_bayes_set(s: int, n: int, alpha: float, pred: ConjugatePredictor = JEFFREYS) -> frozenset[int]:
    """``{y : |y - p| <= q}`` with ``p`` the Bayes predictive and ``q`` the
    posterior-predictive ``(1 - alpha)``-quantile of ``|Y - p|``.

    Under ``Y ~ Bernoulli(p)`` the score is ``1 - p`` with probability ``p``
    and ``p`` with probability ``1 - p``, so the set drops a label only
    when the other label alone already carries mass ``1 - alpha``.
    """
    _check_alpha(alpha)
    p = conjugate_predict(pred, s, n)
    labels = set()
    if not (p > 0.5 and p >= 1.0 - alpha):
        labels.add(0)
    if not (p < 0.5 and p <= alpha):
        labels.add(1)
    return frozenset(labels)


def exact_set_coverage(set_fn, n: int, theta: float, alpha: float) -> float:
    """Exact ``P_theta(Y_{n+1} in set_fn(S_n, n, alpha))`` for i.i.d. Bernoulli data."""
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    weights = binom.pmf(np.arange(n + 1), n, theta)
    terms = []
    for s in range(n + 1):
        cs = set_fn(s, n, alpha)
        terms.append(weights[s] * (theta * (1 in cs) + (1 - theta) * (0 in cs)))
    return math.fsum(terms)


def predictive_coverage(n: int, alpha: float, pred: ConjugatePredictor = JEFFREYS) -> float:
    """Coverage of the constrained-Bayes set under its own prior predictive law.

    Averages ``P(Y in C | S_n = s)`` with ``Y | s ~ Bernoulli(p(s))`` over the
    beta-binomial marginal of ``S_n``.  This is the law the set is built
    to cover, and the value is at least ``1 - alpha`` node by node.
    """
    _check_alpha(alpha)
    marg = betabinom.pmf(np.arange(n + 1), n, pred.a, pred.b)
    terms = []
    for s in range(n + 1):
        p = conjugate_predict(pred, s, n)
        cs = constrained_bayes_set(s, n, alpha, pred)
        terms.append(marg[s] * (p * (1 in cs) + (1 - p) * (0 in cs)))
    return math.fsum(terms)
