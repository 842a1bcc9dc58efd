"""Executable laboratory for four admissibility criteria in Bernoulli and
Gaussian models: risk dominance, anytime validity, marginal coverage and
Cesàro calibration.
"""

from .decision_core import (
    INF,
    DomainError,
    FiniteParamSpace,
    Prior,
    RiskVector,
    binary_entropy,
    dominates,
    kl_excess,
    log_loss,
)
from .harness import ExperimentConfig, derive_substream, summarize
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "INF",
    "DomainError",
    "ExperimentConfig",
    "FiniteParamSpace",
    "Prior",
    "RiskVector",
    "binary_entropy",
    "derive_substream",
    "dominates",
    "kl_excess",
    "log_loss",
    "summarize",
]

__version__ = "0.1.0"
