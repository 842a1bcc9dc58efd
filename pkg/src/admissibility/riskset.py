"""Exact risk vectors of Bernoulli forecasting rules and the lower boundary.

A rule observes ``n`` Bernoulli draws and forecasts the next one from the
success count alone.  Its risk at ``theta`` is the binomial expectation of
the log loss of its forecast, computed exactly by summing over counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binom

from .decision_core import (
    INF,
    DomainError,
    FiniteParamSpace,
    Prior,
    RiskValue,
    RiskVector,
    weighted_risk,
)
from .harness import Table


@dataclass(frozen=True)
class PredictiveRule:
    """Forecast ``probs[s]`` after ``s`` successes in ``n`` trials."""

    n: int
    probs: tuple[float, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if self.n < 0:
            raise DomainError(f"sample size must be >= 0, got {self.n}")
        if len(probs) != self.n + 1:
            raise DomainError(f"rule at n={self.n} needs {self.n + 1} entries, got {len(probs)}")
        if not all(0.0 <= p <= 1.0 for p in probs):
            raise DomainError("forecasts must lie in [0, 1]")

    @classmethod
    def from_function(cls, n: int, f, name: str = "") -> "PredictiveRule":
        return cls(n, tuple(f(s, n) for s in range(n + 1)), name)

    @classmethod
    def conjugate(cls, n: int, a: float, b: float) -> "PredictiveRule":
        return cls(n, tuple((s + a) / (n + a + b) for s in range(n + 1)), f"beta({a:g},{b:g})")

    @classmethod
    def plugin(cls, n: int) -> "PredictiveRule":
        if n < 1:
            raise DomainError("plug-in rule is undefined at n=0")
        return cls(n, tuple(s / n for s in range(n + 1)), "plug-in")

    @classmethod
    def constant(cls, n: int, p: float) -> "PredictiveRule":
        return cls(n, (float(p),) * (n + 1), f"constant({p:g})")

    @property
    def is_symmetric(self) -> bool:
        """Invariant under ``s -> n - s``, ``p -> 1 - p``."""
        return all(
            math.isclose(self.probs[s], 1.0 - self.probs[self.n - s], abs_tol=1e-15)
            for s in range(self.n + 1)
        )


def _count_weights(n: int, theta: float) -> np.ndarray:
    return binom.pmf(np.arange(n + 1), n, theta)


def _loss_terms(theta: float, probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return -theta * np.log(probs) - (1.0 - theta) * np.log1p(-probs)


def exact_risk(rule: PredictiveRule, theta: float) -> RiskValue:
    """Exact expected next-step log loss of ``rule`` under Bernoulli(theta)."""
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta!r}")
    probs = np.asarray(rule.probs)
    # every count has positive probability when 0 < theta < 1
    if np.any((probs == 0.0) | (probs == 1.0)):
        return INF
    w = _count_weights(rule.n, theta)
    return math.fsum((w * _loss_terms(theta, probs)).tolist())


def risk_vector(rule: PredictiveRule, space: FiniteParamSpace) -> RiskVector:
    return RiskVector(exact_risk(rule, th) for th in space)


@dataclass(frozen=True)
class RandomizedRule:
    """Data-independent lottery over deterministic rules."""

    components: tuple[PredictiveRule, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.components) != len(self.weights):
            raise ValueError("one weight per component")
        if any(w < 0 for w in self.weights) or abs(math.fsum(self.weights) - 1) > 1e-12:
            raise ValueError("mixture weights must form a probability vector")
        if len({c.n for c in self.components}) > 1:
            raise ValueError("components must share the sample size")


def mixture_exact_risk(rule: RandomizedRule, theta: float) -> RiskValue:
    """Risk of a lottery, as the expectation over both the count and the draw."""
    n = rule.components[0].n
    w = _count_weights(n, theta)
    terms = []
    for lam, comp in zip(rule.weights, rule.components):
        if lam == 0.0:
            continue
        probs = np.asarray(comp.probs)
        if np.any((probs == 0.0) | (probs == 1.0)):
            return INF
        terms.extend((lam * w * _loss_terms(theta, probs)).tolist())
    return math.fsum(terms)


def bayes_rule_for_prior(prior: Prior, space: FiniteParamSpace, n: int) -> PredictiveRule:
    """Log-loss Bayes rule: the posterior mean of theta given ``s`` of ``n``."""
    if len(prior) != len(space):
        raise ValueError("prior and parameter space differ in size")
    if n < 0:
        raise DomainError("sample size must be >= 0")
    support = [(w, th) for w, th in zip(prior.weights, space.thetas) if w > 0.0]
    if len(support) == 1:
        return PredictiveRule.constant(n, support[0][1])
    logw = np.array([math.log(w) for w, _ in support])
    th = np.array([t for _, t in support])
    s = np.arange(n + 1)[:, None]
    # binomial coefficients cancel in the posterior
    logpost = logw[None, :] + s * np.log(th)[None, :] + (n - s) * np.log1p(-th)[None, :]
    logpost -= logpost.max(axis=1, keepdims=True)
    post = np.exp(logpost)
    post /= post.sum(axis=1, keepdims=True)
    return PredictiveRule(n, tuple((post @ th).tolist()), "bayes")


@dataclass(frozen=True)
class BoundaryTrace:
    """Bayes risk vectors as the prior sweeps a two-point simplex."""

    space: FiniteParamSpace
    n: int
    points: tuple[tuple[Prior, RiskVector], ...]

    @property
    def priors(self) -> list[Prior]:
        return [p for p, _ in self.points]

    @property
    def risks(self) -> np.ndarray:
        return np.array([r for _, r in self.points], dtype=float)

    def rule_at(self, i: int) -> PredictiveRule:
        return bayes_rule_for_prior(self.points[i][0], self.space, self.n)

    def to_table(self, extra_rules: Sequence[PredictiveRule] = ()) -> Table:
        th1, th2 = self.space.thetas
        table = Table(
            ["kind", "label", "prior_weight_1", "risk_theta1", "risk_theta2"],
            meta={"theta1": th1, "theta2": th2, "n": self.n, "grid_size": len(self.points)},
        )
        for prior, r in self.points:
            table.rows.append(["boundary", "", prior.weights[0], r[0], r[1]])
        for rule in extra_rules:
            r = risk_vector(rule, self.space)
            table.rows.append(["rule", rule.name, "", r[0], r[1]])
        return table


def trace_lower_boundary(space: FiniteParamSpace, n: int, grid_size: int = 1001) -> BoundaryTrace:
    """Risk vectors of two-point-prior Bayes rules on an even prior grid.

    Points are ordered by increasing weight on ``space.thetas[0]``.
    """
    if len(space) != 2:
        raise DomainError("boundary tracing is implemented for two-point parameter spaces only")
    if grid_size < 3:
        raise DomainError("grid_size must be at least 3")
    points = []
    for i in range(grid_size):
        w = i / (grid_size - 1)
        prior = Prior((w, 1.0 - w))
        rule = bayes_rule_for_prior(prior, space, n)
        points.append((prior, risk_vector(rule, space)))
    return BoundaryTrace(space, n, tuple(points))


@dataclass(frozen=True)
class HyperplaneReport:
    bayes_value: float
    min_candidate_value: float
    max_violation: float
    n_candidates: int
    n_infinite: int

    @property
    def holds(self) -> bool:
        return self.max_violation <= 1e-10


def check_hyperplane_support(
    prior: Prior,
    space: FiniteParamSpace,
    n: int,
    candidates: Iterable[PredictiveRule],
) -> HyperplaneReport:
    """Check ``<pi, r(bayes)> <= <pi, r(c)>`` for every candidate ``c``.

    ``max_violation`` is the largest amount by which the Bayes rule's
    weighted risk exceeds a candidate's (0 when the inequality holds).
    """
    bayes = bayes_rule_for_prior(prior, space, n)
    bv = weighted_risk(prior, risk_vector(bayes, space))
    worst = 0.0
    best = INF
    count = n_inf = 0
    for cand in candidates:
        count += 1
        cv = weighted_risk(prior, risk_vector(cand, space))
        if math.isinf(cv):
            n_inf += 1
            continue
        best = min(best, cv)
        worst = max(worst, bv - cv)
    return HyperplaneReport(bv, best, worst, count, n_inf)


def boundary_gap(rule: PredictiveRule, trace: BoundaryTrace) -> float:
    """Smallest excess weighted risk of ``rule`` over the traced Bayes rules."""
    if rule.n != trace.n:
        raise ValueError("rule and trace use different sample sizes")
    r = risk_vector(rule, trace.space)
    if not r.is_finite:
        return INF
    gaps = [weighted_risk(prior, r) - weighted_risk(prior, rb) for prior, rb in trace.points]
    # Bayes optimality makes every gap >= 0; negatives are rounding noise
    return max(min(gaps), 0.0)


def random_rules(n: int, count: int, rng: np.random.Generator) -> list[PredictiveRule]:
    """Rules with i.i.d. Uniform(0, 1) forecasts, a cloud inside the risk set."""
    draws = rng.uniform(0.0, 1.0, size=(count, n + 1))
    draws = np.clip(draws, 1e-12, 1 - 1e-12)
    return [PredictiveRule(n, tuple(row.tolist()), "random") for row in draws]


def shadow_price_error(trace: BoundaryTrace) -> float:
    """Largest relative mismatch between prior odds and the boundary slope.

    Along the trace the supporting normal is the prior itself, so the
    multiplier ``pi_2 / pi_1`` must equal ``-dR(theta_1) / dR(theta_2)``.
    Slopes come from central differences at interior grid points.
    """
    risks = trace.risks
    weights = np.array([p.weights[0] for p in trace.priors])
    worst = 0.0
    for i in range(1, len(risks) - 1):
        w = weights[i]
        if w < 0.05 or w > 0.95:
            continue
        d1 = risks[i + 1, 0] - risks[i - 1, 0]
        d2 = risks[i + 1, 1] - risks[i - 1, 1]
        slope_multiplier = -d1 / d2
        multiplier = (1.0 - w) / w
        worst = max(worst, abs(slope_multiplier - multiplier) / multiplier)
    return worst
