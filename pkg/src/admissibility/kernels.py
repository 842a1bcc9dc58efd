"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
module is used.  Set ``ADMISSIBILITY_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

BACKEND: str
_impl: ModuleType

if os.environ.get("ADMISSIBILITY_BACKEND", "").lower() == "python":
    _impl, BACKEND = _pykernels, "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl, BACKEND = _pykernels, "python"

eprocess_scan = _impl.eprocess_scan
gaussian_eprocess_scan = _impl.gaussian_eprocess_scan
defensive_run = _impl.defensive_run
set_adversary_run = _impl.set_adversary_run


def backends() -> dict[str, ModuleType]:
    """Every importable backend by name, for cross-checks and benchmarks."""
    found: dict[str, ModuleType] = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
