"""Time the compiled kernels against their pure-Python twins.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on the workload of the reproduction that uses it.  Both
backends receive identical inputs and their outputs are compared before
timing, so a speed-up is never reported for a kernel that disagrees.
"""

from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from admissibility import kernels
from admissibility.harness import derive_substream


def _workloads() -> dict[str, tuple]:
    rng = derive_substream(0, 0)
    bern = (rng.random((10_000, 200)) < 0.5).astype(np.uint8)
    gauss = rng.standard_normal((2_000, 100))
    source = (rng.random(1_000_000) < 0.5).astype(np.int8)
    return {
        "eprocess_scan": (bern, 0.5, 0.5, 0.5, math.log(20.0), np.ones(200, np.uint8)),
        "gaussian_eprocess_scan": (gauss, 0.0, 1.0, 1.0, math.log(20.0)),
        "defensive_run": (source, False),
        "set_adversary_run": (1_000_000, 0.05, 0.5, 0.5),
    }


def _same(a, b) -> bool:
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(np.asarray(x), np.asarray(y), rtol=0, atol=1e-10) for x, y in zip(a, b))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    found = kernels.backends()
    if "cython" not in found:
        print("compiled extension not available; only the python backend can be timed")
    print(f"{'kernel':<24}{'python s':>12}{'cython s':>12}{'speed-up':>10}  agree")
    for name, inputs in _workloads().items():
        times, outs = {}, {}
        for backend, mod in found.items():
            fn = getattr(mod, name)
            outs[backend] = fn(*inputs)
            times[backend] = min(timeit.repeat(lambda: fn(*inputs), number=1, repeat=args.repeat))
        cy = times.get("cython", math.nan)
        agree = _same(outs["python"], outs["cython"]) if "cython" in outs else True
        print(f"{name:<24}{times['python']:>12.4f}{cy:>12.4f}{times['python'] / cy:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
