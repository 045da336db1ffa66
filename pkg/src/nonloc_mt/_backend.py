"""Kernel backend selection.

Hot loops are compiled with numba when it is importable. Setting
``NONLOC_MT_BACKEND=numpy`` forces the pure-numpy path, which computes the
same quantities with vectorized array code.
"""
from __future__ import annotations

import os

_requested = os.environ.get("NONLOC_MT_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"NONLOC_MT_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def worker_count() -> int:
    """Number of worker threads for batch-parallel loops (``NONLOC_MT_THREADS``)."""
    raw = os.environ.get("NONLOC_MT_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1
