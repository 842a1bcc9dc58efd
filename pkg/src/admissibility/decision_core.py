"""Extended-real risk values, losses and the dominance order.

Risk values are Python floats restricted to ``[0, inf]``.  IEEE infinity is a
genuine element here, not a large sentinel: ``inf == inf``, ``x < inf`` for
every finite ``x`` and ``x + inf == inf``, which is exactly the extended-real
arithmetic the dominance arguments need.  The one undefined operation,
``inf - inf``, never arises because entropies and Bayes risks are finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

INF = math.inf

RiskValue = float


class DomainError(ValueError):
    """An argument lies outside the domain of a loss or risk."""


def risk_value(x: float) -> RiskValue:
    """Validate ``x`` as an element of ``[0, inf]``."""
    x = float(x)
    if math.isnan(x) or x < 0:
        raise DomainError(f"risk values live in [0, inf], got {x!r}")
    return x


def _check_theta(theta: float) -> None:
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta!r}")


def _check_prob(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")


def log_loss(theta: float, p: float) -> RiskValue:
    """Expected log loss of forecasting ``p`` when the truth is Bernoulli(theta).

    Natural logarithm.  Infinite exactly when the forecast rules out an
    outcome that has positive probability.
    """
    _check_theta(theta)
    _check_prob(p)
    if p == 0.0 or p == 1.0:
        return INF
    return -theta * math.log(p) - (1.0 - theta) * math.log1p(-p)


def binary_entropy(theta: float) -> float:
    _check_theta(theta)
    return -theta * math.log(theta) - (1.0 - theta) * math.log1p(-theta)


def kl_excess(theta: float, p: float) -> RiskValue:
    """``log_loss(theta, p) - binary_entropy(theta)``, i.e. KL(Bern(theta) || Bern(p))."""
    _check_theta(theta)
    _check_prob(p)
    if p == 0.0 or p == 1.0:
        return INF
    # direct form avoids cancellation near p == theta
    kl = theta * math.log(theta / p) + (1.0 - theta) * math.log((1.0 - theta) / (1.0 - p))
    return max(kl, 0.0)


def squared_loss(mu: float, a: float) -> float:
    return (mu - a) ** 2


@dataclass(frozen=True)
class FiniteParamSpace:
    """An ordered finite parameter set."""

    thetas: tuple[float, ...]
    bernoulli: bool = True

    def __post_init__(self) -> None:
        thetas = tuple(float(t) for t in self.thetas)
        object.__setattr__(self, "thetas", thetas)
        if not thetas:
            raise DomainError("parameter space must be nonempty")
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise DomainError(f"thetas must be strictly increasing: {thetas}")
        if self.bernoulli and not all(0.0 < t < 1.0 for t in thetas):
            raise DomainError(f"Bernoulli thetas must lie in (0, 1): {thetas}")

    def __len__(self) -> int:
        return len(self.thetas)

    def __iter__(self):
        return iter(self.thetas)


@dataclass(frozen=True)
class Prior:
    """Probability weights over a :class:`FiniteParamSpace`."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise DomainError("prior must have at least one weight")
        if any(x < 0 or math.isnan(x) for x in w):
            raise DomainError(f"prior weights must be nonnegative: {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise DomainError(f"prior weights must sum to 1, got {math.fsum(w)!r}")

    @classmethod
    def normalized(cls, weights: Iterable[float]) -> "Prior":
        """Normalize a nonnegative, nonzero vector (a hyperplane normal) to a prior."""
        w = [float(x) for x in weights]
        total = math.fsum(w)
        if total <= 0:
            raise DomainError("cannot normalize a zero vector")
        return cls(tuple(x / total for x in w))

    def __len__(self) -> int:
        return len(self.weights)


class RiskVector(tuple):
    """Per-parameter risk profile; a point of the risk set."""

    def __new__(cls, values: Iterable[float]) -> "RiskVector":
        return super().__new__(cls, (risk_value(v) for v in values))

    @property
    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self)


def weighted_risk(prior: Prior | Sequence[float], risks: Sequence[float]) -> RiskValue:
    """``<pi, r>`` with the convention ``0 * inf = 0`` (a null atom carries no risk)."""
    weights = prior.weights if isinstance(prior, Prior) else tuple(prior)
    if len(weights) != len(risks):
        raise ValueError("prior and risk vector have different lengths")
    terms = []
    for w, r in zip(weights, risks):
        if w == 0.0:
            continue
        if math.isinf(r):
            return INF
        terms.append(w * r)
    return math.fsum(terms)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a <= b`` coordinatewise with at least one strict coordinate."""
    if len(a) != len(b):
        raise ValueError(f"risk vectors differ in length: {len(a)} vs {len(b)}")
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict
