"""Numba-jitted implementations of the hot array kernels.

Bit-identical to numpy_impl.py; see the notes there on tie-breaking. All
kernels use explicit loops and hand-rolled binary search, which is what numba
compiles best. cache=True persists the compiled machine code next to the
package so the JIT cost is paid once per environment.
"""
from __future__ import annotations

import numba
import numpy as np

NAME = "numba"

_jit = numba.njit(cache=True, nogil=True)


@_jit
def _bisect_left(ref, key):
    lo = 0
    hi = ref.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if ref[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


@_jit
def _bisect_right(ref, key):
    lo = 0
    hi = ref.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if ref[mid] <= key:
            lo = mid + 1
        else:
            hi = mid
    return lo


@_jit
def encode_cols(rows, shift):
    n = rows.shape[0]
    a = rows.shape[1]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        key = np.int64(rows[i, 0])
        for j in range(1, a):
            key = (key << shift) | np.int64(rows[i, j])
        out[i] = key
    return out


@_jit
def merge_sorted(keys_a, perm_a, keys_b, perm_b):
    na = keys_a.size
    nb = keys_b.size
    if nb == 0:
        return keys_a, perm_a
    if na == 0:
        return keys_b.copy(), perm_b.copy()
    keys = np.empty(na + nb, dtype=np.int64)
    perm = np.empty(na + nb, dtype=perm_a.dtype)
    i = 0
    j = 0
    k = 0
    while i < na and j < nb:
        # Ties take the older (a) element first.
        if keys_a[i] <= keys_b[j]:
            keys[k] = keys_a[i]
            perm[k] = perm_a[i]
            i += 1
        else:
            keys[k] = keys_b[j]
            perm[k] = perm_b[j]
            j += 1
        k += 1
    while i < na:
        keys[k] = keys_a[i]
        perm[k] = perm_a[i]
        i += 1
        k += 1
    while j < nb:
        keys[k] = keys_b[j]
        perm[k] = perm_b[j]
        j += 1
        k += 1
    return keys, perm


@_jit
def isin_sorted(keys, ref):
    n = keys.size
    out = np.empty(n, dtype=np.bool_)
    if ref.size == 0:
        for i in range(n):
            out[i] = False
        return out
    for i in range(n):
        pos = _bisect_left(ref, keys[i])
        out[i] = pos < ref.size and ref[pos] == keys[i]
    return out


@_jit
def lookup_ranges(probe, ref):
    n = probe.size
    starts = np.empty(n, dtype=np.int64)
    ends = np.empty(n, dtype=np.int64)
    for i in range(n):
        starts[i] = _bisect_left(ref, probe[i])
        ends[i] = _bisect_right(ref, probe[i])
    return starts, ends


@_jit
def expand_ranges(starts, ends):
    n = starts.size
    total = 0
    for i in range(n):
        total += ends[i] - starts[i]
    probe_idx = np.empty(total, dtype=np.int64)
    ref_pos = np.empty(total, dtype=np.int64)
    k = 0
    for i in range(n):
        for pos in range(starts[i], ends[i]):
            probe_idx[k] = i
            ref_pos[k] = pos
            k += 1
    return probe_idx, ref_pos


@_jit
def first_occurrence(keys):
    n = keys.size
    mask = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return mask
    order = np.argsort(keys)
    # Group-minimum over runs of equal keys: independent of sort stability.
    run_key = keys[order[0]]
    run_min = order[0]
    for t in range(1, n):
        idx = order[t]
        if keys[idx] != run_key:
            mask[run_min] = True
            run_key = keys[idx]
            run_min = idx
        elif idx < run_min:
            run_min = idx
    mask[run_min] = True
    return mask


def warm() -> None:
    """Trigger compilation of every kernel on tiny inputs."""
    rows = np.array([[1, 2], [1, 2], [3, 4]], dtype=np.int32)
    keys = encode_cols(rows, 31)
    perm = np.arange(keys.size, dtype=np.int32)
    merge_sorted(np.sort(keys), perm, np.sort(keys), perm)
    isin_sorted(keys, np.sort(keys))
    s, e = lookup_ranges(keys, np.sort(keys))
    expand_ranges(s, e)
    first_occurrence(keys)
