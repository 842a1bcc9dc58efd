from __future__ import annotations

import os

import pytest

from admissibility.harness import ExperimentConfig

# Keep BLAS single-threaded so timings and sums are reproducible.
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")


@pytest.fixture
def small_config() -> ExperimentConfig:
    return ExperimentConfig(reps=200)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for result in sorted(RESULTS, key=lambda r: r.number):
        terminalreporter.write_line(result.line())
    passed = sum(r.passed for r in RESULTS)
    terminalreporter.write_line(f"{passed}/{len(RESULTS)} criteria passed")
