"""Pure-numpy implementations of the hot array kernels.

Every function here has a numba twin in numba_impl.py with bit-identical
output; tests/test_kernels.py enforces the equivalence. Keep the tie-breaking
conventions in sync:

- merge_sorted: on equal keys, elements of the first (older) array come first.
- first_occurrence: computed via group-minimum over an argsort, so the result
  does not depend on sort stability.
"""
from __future__ import annotations

import numpy as np

NAME = "numpy"


def encode_cols(rows: np.ndarray, shift: int) -> np.ndarray:
    """Pack each int32 row into one int64 key, first column most significant."""
    if rows.size == 0:
        return np.empty(0, dtype=np.int64)
    out = rows[:, 0].astype(np.int64)
    for j in range(1, rows.shape[1]):
        out = (out << shift) | rows[:, j].astype(np.int64)
    return out


def merge_sorted(
    keys_a: np.ndarray,
    perm_a: np.ndarray,
    keys_b: np.ndarray,
    perm_b: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Merge two sorted key arrays (with payload permutations) into one."""
    if keys_b.size == 0:
        return keys_a, perm_a
    if keys_a.size == 0:
        return keys_b.copy(), perm_b.copy()
    pos = np.searchsorted(keys_a, keys_b, side="right")
    keys = np.insert(keys_a, pos, keys_b)
    perm = np.insert(perm_a, pos, perm_b)
    return keys, perm


def isin_sorted(keys: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """mask[i] is True iff keys[i] occurs in the sorted array ref."""
    if keys.size == 0:
        return np.empty(0, dtype=np.bool_)
    if ref.size == 0:
        return np.zeros(keys.size, dtype=np.bool_)
    idx = np.searchsorted(ref, keys, side="left")
    idx_clipped = np.minimum(idx, ref.size - 1)
    return ref[idx_clipped] == keys


def lookup_ranges(probe: np.ndarray, ref: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each probe key, the [start, end) run of equal keys in sorted ref."""
    starts = np.searchsorted(ref, probe, side="left")
    ends = np.searchsorted(ref, probe, side="right")
    return starts.astype(np.int64), ends.astype(np.int64)


def expand_ranges(starts: np.ndarray, ends: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flatten ranges into (probe index, ref position) pairs, probe-major."""
    counts = ends - starts
    total = int(counts.sum())
    if total == 0:
        e = np.empty(0, dtype=np.int64)
        return e, e.copy()
    probe_idx = np.repeat(np.arange(starts.size, dtype=np.int64), counts)
    offsets = np.cumsum(counts) - counts
    ref_pos = (
        np.arange(total, dtype=np.int64)
        - np.repeat(offsets, counts)
        + np.repeat(starts, counts)
    )
    return probe_idx, ref_pos


def first_occurrence(keys: np.ndarray) -> np.ndarray:
    """mask[i] is True iff keys[i] does not occur at any position j < i."""
    n = keys.size
    if n == 0:
        return np.empty(0, dtype=np.bool_)
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    run_starts = np.empty(n, dtype=np.bool_)
    run_starts[0] = True
    run_starts[1:] = sk[1:] != sk[:-1]
    starts_idx = np.flatnonzero(run_starts)
    firsts = np.minimum.reduceat(order, starts_idx)
    mask = np.zeros(n, dtype=np.bool_)
    mask[firsts] = True
    return mask
