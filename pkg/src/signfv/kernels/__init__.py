"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``SIGNFV_DISABLE_NUMBA=1`` to
force the numpy path; it is also used when numba cannot be imported. Both
paths produce bit-identical results.
"""

import os

from . import _numpy as numpy_backend

_KERNELS = (
    "weighted_scores",
    "vote_counts",
    "decide",
    "count_mismatches",
    "mc_errors",
    "enumerate_errors",
    "column_ones",
    "hamming",
)


def _load_numba():
    try:
        from . import _numba
    except ImportError:
        return None
    return _numba


numba_backend = None
if os.environ.get("SIGNFV_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    numba_backend = _load_numba()

_active = numba_backend if numba_backend is not None else numpy_backend
BACKEND = "numba" if numba_backend is not None else "numpy"

weighted_scores = _active.weighted_scores
vote_counts = _active.vote_counts
decide = _active.decide
count_mismatches = _active.count_mismatches
mc_errors = _active.mc_errors
enumerate_errors = _active.enumerate_errors
column_ones = _active.column_ones
hamming = _active.hamming

__all__ = ["BACKEND", "numpy_backend", "numba_backend", *_KERNELS]
