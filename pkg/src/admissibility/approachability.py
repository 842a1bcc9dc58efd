"""Defensive forecasting: a deterministic forecaster whose average forecast
tracks the average outcome on every sequence, plus the sequence sources it
is run against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .bernoulli import JEFFREYS, ConjugatePredictor, conjugate_predict
from .decision_core import DomainError
from .harness import Table, derive_substream


@dataclass(frozen=True)
class CalibrationLedger:
    """Running sums for the forecaster; ``deficit = sum_x - sum_p``."""

    t: int = 0
    deficit: float = 0.0
    sum_p: float = 0.0
    sum_x: int = 0


def defensive_predict(ledger: CalibrationLedger) -> float:
    """Sign-of-deficit rule: 1 if behind, 0 if ahead, 1/2 when level."""
    if ledger.deficit > 0:
        return 1.0
    if ledger.deficit < 0:
        return 0.0
    return 0.5


def ledger_update(ledger: CalibrationLedger, p: float, x: int) -> CalibrationLedger:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"forecast must lie in [0, 1], got {p!r}")
    if x not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {x!r}")
    return replace(
        ledger,
        t=ledger.t + 1,
        deficit=ledger.deficit + (x - p),
        sum_p=ledger.sum_p + p,
        sum_x=ledger.sum_x + x,
    )


def calibration_error(ledger: CalibrationLedger) -> float:
    """``|mean forecast - mean outcome|``."""
    if ledger.t < 1:
        raise DomainError("calibration error needs at least one round")
    return abs(ledger.deficit) / ledger.t


# --- sequence sources ---------------------------------------------------------

SOURCES = ("iid", "periodic", "constant", "adaptive")


@dataclass(frozen=True)
class SequenceSource:
    """Outcome generator.

    ``adaptive`` sees the forecast before choosing the outcome and always
    plays against it; the others are fixed in advance.
    """

    kind: str
    seed: int = 0
    theta: float = 0.5
    pattern: tuple[int, ...] = (1, 1, 0)

    def __post_init__(self) -> None:
        if self.kind not in SOURCES:
            raise DomainError(f"unknown source {self.kind!r}; expected one of {SOURCES}")
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError("theta must lie in [0, 1]")
        if not self.pattern or any(x not in (0, 1) for x in self.pattern):
            raise DomainError("pattern must be a nonempty binary tuple")

    @property
    def adversarial(self) -> bool:
        return self.kind == "adaptive"

    def outcomes(self, horizon: int) -> np.ndarray:
        """Pre-committed outcomes (ignored by the adaptive source)."""
        if self.kind == "iid":
            return (derive_substream(self.seed, 0).random(horizon) < self.theta).astype(np.int8)
        if self.kind == "periodic":
            reps = -(-horizon // len(self.pattern))
            return np.tile(np.asarray(self.pattern, dtype=np.int8), reps)[:horizon].copy()
        if self.kind == "constant":
            return np.ones(horizon, dtype=np.int8)
        return np.zeros(horizon, dtype=np.int8)


@dataclass(frozen=True)
class CesaroRun:
    source: str
    predictions: np.ndarray
    outcomes: np.ndarray
    deficits: np.ndarray

    @property
    def errors(self) -> np.ndarray:
        t = np.arange(1, self.deficits.size + 1)
        return np.abs(self.deficits) / t

    @property
    def max_abs_deficit(self) -> float:
        return float(np.max(np.abs(self.deficits)))

    @property
    def final_error(self) -> float:
        return float(self.errors[-1])

    def to_table(self, every: int = 1) -> Table:
        table = Table(["t", "calibration_error"], meta={"source": self.source, "horizon": self.deficits.size})
        errs = self.errors
        for i in range(every - 1, errs.size, every):
            table.rows.append([i + 1, float(errs[i])])
        return table


def run_cesaro_experiment(source: SequenceSource, horizon: int) -> CesaroRun:
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    preds, outs, deficits = kernels.defensive_run(source.outcomes(horizon), source.adversarial)
    return CesaroRun(source.kind, np.asarray(preds), np.asarray(outs), np.asarray(deficits))


# --- non-Bayes witness --------------------------------------------------------

@dataclass(frozen=True)
class WitnessReport:
    found: bool
    history: tuple[int, ...]
    defensive_prediction: float
    min_gap: float
    predictors: tuple[ConjugatePredictor, ...]


def _defensive_after(history: Sequence[int]) -> float:
    ledger = CalibrationLedger()
    for x in history:
        ledger = ledger_update(ledger, defensive_predict(ledger), x)
    return defensive_predict(ledger)


def non_bayes_witness(
    horizon: int, predictor_grid: Sequence[ConjugatePredictor], tol: float = 1e-9
) -> WitnessReport:
    """Search histories up to length ``horizon`` for one where the defensive
    forecast differs from every conjugate predictive in the grid by more
    than ``tol``.  Histories are scanned by length, then lexicographically.
    """
    grid = tuple(predictor_grid)
    if not grid:
        raise DomainError("predictor grid must be nonempty")
    if horizon < 0:
        raise DomainError("horizon must be >= 0")
    best: WitnessReport | None = None
    for length in range(horizon + 1):
        for history in itertools.product((0, 1), repeat=length):
            p = _defensive_after(history)
            s = sum(history)
            gap = min(abs(p - conjugate_predict(pr, s, length)) for pr in grid)
            report = WitnessReport(gap > tol, tuple(history), p, gap, grid)
            if report.found:
                return report
            if best is None or gap > best.min_gap:
                best = report
    assert best is not None
    return best


def default_predictor_grid(size: int = 5) -> list[ConjugatePredictor]:
    """Beta(a, b) predictors with ``a, b`` log-spaced over [0.1, 10]."""
    vals = np.geomspace(0.1, 10.0, size)
    return [ConjugatePredictor(float(a), float(b)) for a in vals for b in vals]


# --- Cesàro miscoverage of the constrained-Bayes set --------------------------

def set_adversary_miss_rate(
    horizon: int, alpha: float, pred: ConjugatePredictor = JEFFREYS
) -> np.ndarray:
    """Running miss rate of the constrained-Bayes set against an adversary
    that plays the excluded label whenever the set is a singleton.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    misses = np.asarray(kernels.set_adversary_run(horizon, alpha, pred.a, pred.b), dtype=np.int64)
    return np.cumsum(misses) / np.arange(1, horizon + 1)


def deficit_bound_holds(run: CesaroRun) -> bool:
    return run.max_abs_deficit <= 1.0 and math.isfinite(run.final_error)
