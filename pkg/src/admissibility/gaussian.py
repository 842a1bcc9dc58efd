"""Gaussian location laboratory under squared loss: sample mean, Bayes
shrinkage, a likelihood-ratio e-process and a split-conformal interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Sequence

import numpy as np
from scipy import integrate

from . import kernels
from .conformal import Interval, calibrate
from .decision_core import DomainError
from .harness import ExperimentConfig, SummaryStat, binomial_se, derive_substream, summarize


@dataclass(frozen=True)
class GaussianModel:
    """``X_i ~ N(mu, sigma^2)`` with known ``sigma`` and a ``N(mu0, tau^2)`` prior."""

    sigma: float = 1.0
    mu0: float = 0.0
    tau: float = 1.0

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and self.tau > 0):
            raise DomainError(f"sigma and tau must be positive, got ({self.sigma}, {self.tau})")

    def weight(self, n: int) -> float:
        """Shrinkage weight on the sample mean."""
        _check_n(n, allow_zero=True)
        t2 = self.tau * self.tau
        return n * t2 / (n * t2 + self.sigma * self.sigma)


def _check_n(n: int, allow_zero: bool = False) -> None:
    if n < (0 if allow_zero else 1):
        raise DomainError(f"sample size must be >= {0 if allow_zero else 1}, got {n}")


def sample_mean_risk(model: GaussianModel, n: int) -> float:
    _check_n(n)
    return model.sigma**2 / n


def shrinkage_estimate(model: GaussianModel, xbar: float, n: int) -> float:
    _check_n(n)
    w = model.weight(n)
    return w * xbar + (1.0 - w) * model.mu0


def shrinkage_risk(model: GaussianModel, mu: float, n: int) -> float:
    """Variance plus squared bias of the shrinkage estimator at ``mu``."""
    _check_n(n)
    w = model.weight(n)
    return w * w * model.sigma**2 / n + (1.0 - w) ** 2 * (mu - model.mu0) ** 2


def crossing_distance(model: GaussianModel, n: int) -> float:
    """``|mu - mu0|`` at which shrinkage risk equals ``sigma^2/n``."""
    _check_n(n)
    w = model.weight(n)
    return math.sqrt(model.sigma**2 * (1.0 + w) / (n * (1.0 - w)))


def mc_sample_mean_risk(
    model: GaussianModel, mu: float, n: int, reps: int, seed: int, stream: int = 0
) -> SummaryStat:
    """Monte-Carlo squared error of the sample mean; ``stream`` offsets the
    substream indices so different ``mu`` values use independent draws."""
    _check_n(n)
    errs = np.empty(reps)
    for r in range(reps):
        x = mu + model.sigma * derive_substream(seed, stream * reps + r).standard_normal(n)
        errs[r] = (x.mean() - mu) ** 2
    return summarize(errs)


# --- e-process ----------------------------------------------------------------

@dataclass(frozen=True)
class GaussianEProcessState:
    log_value: float = 0.0
    t: int = 0
    total: float = 0.0

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    def mu_hat(self, model: GaussianModel) -> float:
        """Posterior mean after ``t`` observations (``mu0`` when ``t = 0``)."""
        s2, t2 = model.sigma**2, model.tau**2
        return (t2 * self.total + s2 * model.mu0) / (self.t * t2 + s2)


def log_density_ratio(x: float, mu_hat: float, model: GaussianModel) -> float:
    """``log f_{mu_hat}(x) - log f_{mu0}(x)``."""
    return ((x - model.mu0) ** 2 - (x - mu_hat) ** 2) / (2.0 * model.sigma**2)


def gaussian_eprocess_update(
    state: GaussianEProcessState, x: float, model: GaussianModel
) -> GaussianEProcessState:
    factor = log_density_ratio(x, state.mu_hat(model), model)
    return replace(state, log_value=state.log_value + factor, t=state.t + 1, total=state.total + x)


def factor_expectation(mu_hat: float, model: GaussianModel) -> float:
    """``E[f_{mu_hat}(X)/f_{mu0}(X)]`` under ``X ~ N(mu0, sigma^2)`` by
    adaptive quadrature over ``mu0 +- 10 sigma``."""
    sig = model.sigma
    norm = 1.0 / (sig * math.sqrt(2.0 * math.pi))

    def integrand(x: float) -> float:
        return norm * math.exp(-((x - model.mu0) ** 2) / (2 * sig * sig) + log_density_ratio(x, mu_hat, model))

    lo, hi = model.mu0 - 10 * sig, model.mu0 + 10 * sig
    val, _ = integrate.quad(integrand, lo, hi, points=[mu_hat] if lo < mu_hat < hi else None,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def eprocess_quadrature_deviation(model: GaussianModel, mu_hats: Sequence[float] | None = None) -> float:
    """Largest ``|E[factor] - 1|`` over a grid of plug-in means within 3 sigma of ``mu0``."""
    if mu_hats is None:
        mu_hats = model.mu0 + model.sigma * np.linspace(-3.0, 3.0, 25)
    return max(abs(factor_expectation(float(m), model) - 1.0) for m in mu_hats)


@dataclass(frozen=True)
class VilleResult:
    crossing_rate: float
    se: float
    reps: int
    horizon: int
    alpha: float


def gaussian_ville_mc(
    model: GaussianModel, horizon: int, reps: int, seed: int, alpha: float
) -> VilleResult:
    """Fraction of null paths with ``max_{t <= horizon} E_t >= 1/alpha``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    xs = np.empty((reps, horizon))
    for r in range(reps):
        xs[r] = model.mu0 + model.sigma * derive_substream(seed, r).standard_normal(horizon)
    _, _, first = kernels.gaussian_eprocess_scan(xs, model.mu0, model.sigma, model.tau, math.log(1.0 / alpha))
    rate = float(np.count_nonzero(np.asarray(first) >= 0)) / reps
    return VilleResult(rate, binomial_se(rate, reps), reps, horizon, alpha)


# --- conformal interval ---------------------------------------------------------

def gaussian_conformal_interval(residuals: Sequence[float], xbar: float, alpha: float) -> Interval:
    """``[xbar - q, xbar + q]`` with ``q`` the split-conformal quantile of ``|residuals|``."""
    q = calibrate(np.abs(np.asarray(residuals, dtype=float)), alpha).quantile
    return Interval(xbar - q, xbar + q)


@dataclass(frozen=True)
class CoverageResult:
    coverage: float
    se: float
    mean_half_width: float
    reps: int


def mc_interval_coverage(
    model: GaussianModel, mu: float, n: int, n_cal: int, alpha: float, reps: int, seed: int
) -> CoverageResult:
    """Train on ``n`` points, calibrate ``|Z - xbar|`` on ``n_cal`` fresh
    points, test on one more; all draws i.i.d. ``N(mu, sigma^2)``."""
    hits = np.empty(reps, dtype=bool)
    widths = np.empty(reps)
    for r in range(reps):
        z = mu + model.sigma * derive_substream(seed, r).standard_normal(n + n_cal + 1)
        xbar = float(z[:n].mean())
        iv = gaussian_conformal_interval(z[n:-1] - xbar, xbar, alpha)
        hits[r] = iv.contains(float(z[-1]))
        widths[r] = iv.half_width
    cov = float(np.count_nonzero(hits)) / reps
    return CoverageResult(cov, binomial_se(cov, reps), float(np.mean(widths)), reps)


def interval_point_risk(model: GaussianModel, n: int, half_width: float) -> float:
    """Squared-loss risk of the interval read as a point decision by its worst member.

    ``E[(|xbar - mu| + q)^2] = sigma^2/n + 2 q sigma sqrt(2/(pi n)) + q^2``,
    constant in ``mu`` and strictly above the centre's risk when ``q > 0``.
    """
    _check_n(n)
    sd = model.sigma / math.sqrt(n)
    return sd * sd + 2.0 * half_width * sd * math.sqrt(2.0 / math.pi) + half_width**2


# --- separation report ----------------------------------------------------------

@dataclass(frozen=True)
class SeparationCheck:
    name: str
    passed: bool
    values: dict[str, Any]


def separation_report(
    model: GaussianModel,
    config: ExperimentConfig,
    n: int = 10,
    mu_grid: Sequence[float] = tuple(range(-3, 4)),
    coverage_alpha: float = 0.1,
    coverage_reps: int = 1000,
) -> list[SeparationCheck]:
    """The three pairwise non-nesting checks.

    (i) the sample mean has constant risk ``sigma^2/n`` and emits neither a
    process nor a set; (ii) the e-process factor has unit null expectation
    and Ville control, while its plug-in estimate loses to the sample mean
    beyond the crossing distance; (iii) the interval covers, but read as a
    point decision it is dominated by its own centre.
    """
    alpha, reps = config.alpha, config.reps

    exact = sample_mean_risk(model, n)
    stats = [mc_sample_mean_risk(model, mu, n, reps, config.seed, stream=j) for j, mu in enumerate(mu_grid)]
    means = [s.mean for s in stats]
    spread = max(means) - min(means)
    worst_z = max(abs(s.mean - exact) / s.mc_standard_error for s in stats)
    max_se = max(s.mc_standard_error for s in stats)
    check_i = SeparationCheck(
        "sample_mean_blackwell_only",
        passed=worst_z <= 3.0 and spread <= 3.0 * math.sqrt(2.0) * max_se,
        values={"exact_risk": exact, "mc_risks": means, "max_z": worst_z, "spread": spread,
                "max_se": max_se, "emits": "point"},
    )

    deviation = eprocess_quadrature_deviation(model)
    ville = gaussian_ville_mc(model, 100, reps, config.seed, alpha)
    delta = crossing_distance(model, n)
    far = model.mu0 + 2.0 * delta
    risk_far = shrinkage_risk(model, far, n)
    check_ii = SeparationCheck(
        "eprocess_av_only",
        passed=deviation <= 1e-8 and ville.crossing_rate <= alpha and risk_far > exact,
        values={"quadrature_deviation": deviation, "ville_rate": ville.crossing_rate,
                "ville_se": ville.se, "alpha": alpha, "crossing_distance": delta,
                "plugin_risk_at_2x_crossing": risk_far, "sample_mean_risk": exact},
    )

    cov = mc_interval_coverage(model, model.mu0, n, 50, coverage_alpha, min(reps, coverage_reps), config.seed)
    point_risk = interval_point_risk(model, n, cov.mean_half_width)
    check_iii = SeparationCheck(
        "interval_coverage_only",
        passed=cov.coverage >= 1 - coverage_alpha - 3 * cov.se and point_risk > exact,
        values={"coverage": cov.coverage, "se": cov.se, "nominal": 1 - coverage_alpha,
                "mean_half_width": cov.mean_half_width, "interval_point_risk": point_risk,
                "centre_risk": exact},
    )
    return [check_i, check_ii, check_iii]


def separation_json(checks: Sequence[SeparationCheck]) -> dict[str, Any]:
    return {c.name: {"passed": c.passed, **c.values} for c in checks}
