from __future__ import annotations

import math

import numpy as np
import pytest

from admissibility import kernels
from admissibility.harness import derive_substream

BACKENDS = kernels.backends()


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


needs_both = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


@needs_both
class TestBackendEquivalence:
    py = BACKENDS["python"]
    cy = BACKENDS.get("cython")

    @pytest.mark.parametrize("monitor_every", [1, 7])
    def test_eprocess_scan(self, monitor_every):
        rng = derive_substream(0, 0)
        xs = (rng.random((64, 200)) < 0.5).astype(np.uint8)
        monitor = np.zeros(200, dtype=np.uint8)
        monitor[monitor_every - 1 :: monitor_every] = 1
        args = (xs, 0.5, 0.5, 0.5, math.log(20.0), monitor)
        for a, b in zip(self.py.eprocess_scan(*args), self.cy.eprocess_scan(*args)):
            np.testing.assert_allclose(np.asarray(a), np.asarray(b), rtol=0, atol=1e-12)

    def test_first_crossing_identical(self):
        xs = (derive_substream(1, 0).random((500, 200)) < 0.5).astype(np.uint8)
        args = (xs, 0.5, 0.5, 0.5, math.log(20.0), np.ones(200, np.uint8))
        assert np.array_equal(np.asarray(self.py.eprocess_scan(*args)[2]), np.asarray(self.cy.eprocess_scan(*args)[2]))

    def test_gaussian_scan(self):
        xs = derive_substream(2, 0).standard_normal((32, 100))
        args = (xs, 0.0, 1.0, 1.0, math.log(20.0))
        for a, b in zip(self.py.gaussian_eprocess_scan(*args), self.cy.gaussian_eprocess_scan(*args)):
            np.testing.assert_allclose(np.asarray(a), np.asarray(b), rtol=0, atol=1e-11)

    @pytest.mark.parametrize("adversarial", [False, True])
    def test_defensive_run(self, adversarial):
        src = (derive_substream(3, 0).random(5000) < 0.3).astype(np.int8)
        for a, b in zip(self.py.defensive_run(src, adversarial), self.cy.defensive_run(src, adversarial)):
            assert np.array_equal(np.asarray(a), np.asarray(b))

    @pytest.mark.parametrize("alpha", [0.05, 0.2])
    def test_set_adversary(self, alpha):
        a = np.asarray(self.py.set_adversary_run(3000, alpha, 0.5, 0.5))
        b = np.asarray(self.cy.set_adversary_run(3000, alpha, 0.5, 0.5))
        assert np.array_equal(a, b)
