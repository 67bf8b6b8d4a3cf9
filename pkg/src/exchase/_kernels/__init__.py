"""Hot array kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time from the EXCHASE_KERNELS
environment variable:

- "numba": require the jitted backend (ImportError if numba is unusable),
- "numpy": force the pure-numpy fallback,
- "auto" (default): numba if it imports, else numpy.

Both backends produce bit-identical results; benchmarks/bench_kernels.py
compares their throughput.
"""
from __future__ import annotations

import os

from . import numpy_impl

_choice = os.environ.get("EXCHASE_KERNELS", "auto").strip().lower()

if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"EXCHASE_KERNELS must be auto, numba, or numpy, got {_choice!r}"
    )

if _choice == "numpy":
    _impl = numpy_impl
else:
    try:
        from . import numba_impl as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "numba":
            raise
        _impl = numpy_impl

BACKEND: str = _impl.NAME

encode_cols = _impl.encode_cols
merge_sorted = _impl.merge_sorted
isin_sorted = _impl.isin_sorted
lookup_ranges = _impl.lookup_ranges
expand_ranges = _impl.expand_ranges
first_occurrence = _impl.first_occurrence


def warm() -> None:
    """Pre-compile the active backend (no-op for the numpy fallback)."""
    warm_fn = getattr(_impl, "warm", None)
    if warm_fn is not None:
        warm_fn()
