"""Likelihood-ratio e-process for a Bernoulli point null, the naive repeated
z-test it is compared with, and the type-I error reproduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .bernoulli import JEFFREYS, ConjugatePredictor, conjugate_predict
from .decision_core import DomainError
from .harness import ExperimentConfig, Table, binomial_se, derive_substream

Z_CRIT = 1.96


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


@dataclass(frozen=True)
class EProcessState:
    """Running product ``E_t`` kept in log space.

    The alternative forecast for step ``t + 1`` is the conjugate predictive
    after ``s`` successes in ``t`` steps.
    """

    theta0: float
    predictor: ConjugatePredictor = JEFFREYS
    log_value: float = 0.0
    t: int = 0
    s: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.theta0 < 1.0:
            raise DomainError(f"null probability must lie in (0, 1), got {self.theta0!r}")

    @classmethod
    def with_value(cls, value: float, theta0: float = 0.5) -> "EProcessState":
        if value < 0:
            raise DomainError("e-process values are nonnegative")
        return cls(theta0, log_value=math.log(value) if value > 0 else -math.inf)

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    @property
    def forecast(self) -> float:
        return conjugate_predict(self.predictor, self.s, self.t)


def eprocess_update(state: EProcessState, x: int) -> EProcessState:
    if x not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {x!r}")
    p, th = state.forecast, state.theta0
    factor = math.log(p / th) if x else math.log((1 - p) / (1 - th))
    return replace(state, log_value=state.log_value + factor, t=state.t + 1, s=state.s + x)


def run_eprocess(xs: Sequence[int], theta0: float, predictor: ConjugatePredictor = JEFFREYS) -> list[EProcessState]:
    """All states along a path, starting from the empty history."""
    states = [EProcessState(theta0, predictor)]
    for x in xs:
        states.append(eprocess_update(states[-1], int(x)))
    return states


def eprocess_martingale_deviation(
    theta0: float, depth: int, predictor: ConjugatePredictor = JEFFREYS
) -> float:
    """Largest deviation of ``E[factor | past]`` from 1 under the null.

    The factor depends on the past only through ``(s, t)``, so enumerating
    the lattice up to ``depth`` covers every history.
    """
    if not 0.0 < theta0 < 1.0:
        raise DomainError("null probability must lie in (0, 1)")
    if depth < 1:
        raise DomainError("depth must be >= 1")
    worst = 0.0
    for t in range(depth):
        for s in range(t + 1):
            p = conjugate_predict(predictor, s, t)
            mean_factor = theta0 * (p / theta0) + (1 - theta0) * ((1 - p) / (1 - theta0))
            worst = max(worst, abs(mean_factor - 1.0))
    return worst


def ville_reject(state: EProcessState, alpha: float) -> bool:
    """Reject once ``E_t >= 1/alpha`` (inclusive)."""
    _check_alpha(alpha)
    return state.log_value >= math.log(1.0 / alpha)


def _z_stats(counts: np.ndarray, looks: np.ndarray) -> np.ndarray:
    return np.abs(counts / looks - 0.5) / np.sqrt(0.25 / looks)


def naive_peeking_test(xs: Sequence[int], looks: Sequence[int], alpha: float = 0.05) -> bool:
    """Two-sided z-test of theta = 1/2 at each look; reject if any look rejects.

    The per-look critical value is 1.96 (alpha = 0.05 per look, no
    multiplicity correction); ``alpha`` is validated but only 0.05 is used
    by the reproduction.
    """
    _check_alpha(alpha)
    if len(looks) == 0:
        raise DomainError("at least one look is required")
    looks_arr = np.asarray(looks, dtype=np.int64)
    if np.any(np.diff(looks_arr) <= 0) or looks_arr[0] < 1:
        raise DomainError("looks must be positive and strictly increasing")
    xs_arr = np.asarray(xs, dtype=np.int64)
    if looks_arr[-1] > xs_arr.size:
        raise DomainError("a look exceeds the sequence length")
    counts = np.cumsum(xs_arr)[looks_arr - 1]
    return bool(np.any(_z_stats(counts, looks_arr) > Z_CRIT))


@dataclass(frozen=True)
class Table3Result:
    eprocess_rate: float
    eprocess_se: float
    naive_rate: float
    naive_se: float
    reps: int
    seed: int
    mean_final_value: float


def simulate_null_paths(config: ExperimentConfig, theta0: float = 0.5) -> np.ndarray:
    """``reps x horizon`` Bernoulli(theta0) outcomes, one substream per row."""
    xs = np.empty((config.reps, config.horizon), dtype=np.uint8)
    for r in range(config.reps):
        xs[r] = derive_substream(config.seed, r).random(config.horizon) < theta0
    return xs


def run_table3(
    config: ExperimentConfig, theta0: float = 0.5, predictor: ConjugatePredictor = JEFFREYS
) -> Table3Result:
    """Type-I error of the e-process and of naive peeking under the null."""
    _check_alpha(config.alpha)
    looks = np.asarray(config.looks, dtype=np.int64)
    if looks.size == 0 or looks[-1] > config.horizon:
        raise DomainError("looks must be nonempty and within the horizon")
    xs = simulate_null_paths(config, theta0)
    monitor = np.zeros(config.horizon, dtype=np.uint8)
    if config.monitor_looks_only:
        monitor[looks - 1] = 1
    else:
        monitor[:] = 1
    log_final, _, first = kernels.eprocess_scan(
        xs, theta0, predictor.a, predictor.b, math.log(1.0 / config.alpha), monitor
    )
    e_rej = first >= 0

    counts = np.cumsum(xs, axis=1, dtype=np.int64)[:, looks - 1]
    naive_rej = np.any(_z_stats(counts, looks[None, :]) > Z_CRIT, axis=1)

    e_rate = float(np.count_nonzero(e_rej)) / config.reps
    n_rate = float(np.count_nonzero(naive_rej)) / config.reps
    return Table3Result(
        eprocess_rate=e_rate,
        eprocess_se=binomial_se(e_rate, config.reps),
        naive_rate=n_rate,
        naive_se=binomial_se(n_rate, config.reps),
        reps=config.reps,
        seed=config.seed,
        mean_final_value=math.fsum(np.exp(log_final).tolist()) / config.reps,
    )


def table3_report(config: ExperimentConfig) -> Table:
    res = run_table3(config)
    table = Table(
        ["strategy", "rejection_rate", "mc_se", "B", "seed"],
        meta={**config.as_dict(), "experiment": "table3"},
    )
    table.rows.append(["eprocess", res.eprocess_rate, res.eprocess_se, res.reps, res.seed])
    table.rows.append(["naive_peeking", res.naive_rate, res.naive_se, res.reps, res.seed])
    table.rows.append(["nominal", config.alpha, 0.0, res.reps, res.seed])
    return table


def path_trace(xs: Sequence[int], theta0: float = 0.5) -> Table:
    """Per-step ``(t, E_t)`` along one path, for trajectory plots."""
    table = Table(["t", "e_value"], meta={"theta0": theta0})
    for st in run_eprocess(xs, theta0):
        table.rows.append([st.t, st.value])
    return table
