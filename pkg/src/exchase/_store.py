"""Append-only columnar storage for atoms, shared by instances and engines.

Layout
------
- TermPool interns terms to dense int keys (append-only, bidirectional).
- One Arena per predicate holds the atom arguments as an append-only
  (n, arity) int32 matrix plus sorted int64 key caches per bound-position
  mask. A row never moves once appended, so an Instance is just a reference
  to the store plus a per-predicate row count: old snapshots stay valid while
  a derivation grows the store.
- Packed keys use 63 // arity bits per column, first column most
  significant; the pool size is checked against that budget on every append.

Null bookkeeping
----------------
The pool memoizes the nulls invented for each trigger so that a trigger can
be re-materialized with the same nulls it fired with:

- `trigger_nulls`, keyed by (rule id, full body binding): fresh per-firing
  naming, used by the oblivious/restricted/equivalent chase.
- `skolems`, keyed by (rule id, existential var, frontier image): functional
  Skolem naming, used by the semi-oblivious chase.

Fresh nulls carry a per-store derivation tag in their provenance so nulls
from independent derivations never compare equal by accident (retraction
checks derive the fixed-term set from structural sharing).
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Optional

import numpy as np

from . import _kernels as K
from .model import (
    Atom,
    Constant,
    Instance,
    KIND_CONSTANT,
    KIND_NULL,
    KIND_VARIABLE,
    ModelError,
    Null,
    Schema,
    Term,
    Variable,
    term_kind,
)

_derivation_tags = itertools.count()


class TermPool:
    """Bidirectional Term <-> dense int key mapping, append-only."""

    __slots__ = (
        "terms",
        "_index",
        "_kinds",
        "_kinds_arr",
        "null_seq",
        "skolems",
        "trigger_nulls",
        "_input_vars",
        "tag",
    )

    def __init__(self) -> None:
        self.terms: list[Term] = []
        self._index: dict[Term, int] = {}
        self._kinds: list[int] = []
        self._kinds_arr: Optional[np.ndarray] = None
        self.null_seq = 0
        self.skolems: dict[tuple, int] = {}
        self.trigger_nulls: dict[tuple, tuple[int, ...]] = {}
        self._input_vars: dict[str, int] = {}
        self.tag = next(_derivation_tags)

    def __len__(self) -> int:
        return len(self.terms)

    def intern(self, t: Term) -> int:
        key = self._index.get(t)
        if key is None:
            key = len(self.terms)
            self.terms.append(t)
            self._index[t] = key
            self._kinds.append(term_kind(t))
            self._kinds_arr = None
        return key

    def key_of(self, t: Term) -> Optional[int]:
        return self._index.get(t)

    def term_of(self, key: int) -> Term:
        return self.terms[key]

    def kinds_array(self) -> np.ndarray:
        if self._kinds_arr is None or self._kinds_arr.size != len(self._kinds):
            self._kinds_arr = np.array(self._kinds, dtype=np.int8)
        return self._kinds_arr

    # -- null invention ------------------------------------------------------

    def fresh_null(self, provenance) -> int:
        null = Null(self.null_seq, provenance)
        self.null_seq += 1
        return self.intern(null)

    def input_var_null(self, name: str) -> int:
        """The frozen null standing for an input-instance variable."""
        key = self._input_vars.get(name)
        if key is None:
            key = self.fresh_null(("input", name))
            self._input_vars[name] = key
        return key

    def nulls_for_trigger(
        self, rule_id: str, binding_keys: tuple[int, ...], n_vars: int
    ) -> tuple[int, ...]:
        """Per-firing nulls for (rule, binding), invented once and remembered."""
        memo_key = (rule_id, binding_keys)
        keys = self.trigger_nulls.get(memo_key)
        if keys is None:
            keys = tuple(
                self.fresh_null((self.tag, rule_id, i)) for i in range(n_vars)
            )
            self.trigger_nulls[memo_key] = keys
        return keys

    def peek_trigger_nulls(
        self, rule_id: str, binding_keys: tuple[int, ...]
    ) -> Optional[tuple[int, ...]]:
        return self.trigger_nulls.get((rule_id, binding_keys))

    def skolem_null(self, rule_id: str, var: str, frontier_keys: tuple[int, ...]) -> int:
        memo_key = (rule_id, var, frontier_keys)
        key = self.skolems.get(memo_key)
        if key is None:
            key = self.fresh_null((self.tag, rule_id, var, frontier_keys))
            self.skolems[memo_key] = key
        return key

    def peek_skolem(
        self, rule_id: str, var: str, frontier_keys: tuple[int, ...]
    ) -> Optional[int]:
        return self.skolems.get((rule_id, var, frontier_keys))

    def clone(self) -> "TermPool":
        p = TermPool.__new__(TermPool)
        p.terms = list(self.terms)
        p._index = dict(self._index)
        p._kinds = list(self._kinds)
        p._kinds_arr = None
        p.null_seq = self.null_seq
        p.skolems = dict(self.skolems)
        p.trigger_nulls = dict(self.trigger_nulls)
        p._input_vars = dict(self._input_vars)
        p.tag = next(_derivation_tags)
        return p


class Arena:
    """Append-only (n, arity) int32 row matrix plus sorted key caches."""

    __slots__ = ("arity", "shift", "_buf", "n", "_caches")

    def __init__(self, arity: int) -> None:
        self.arity = arity
        self.shift = 63 // arity
        self._buf = np.empty((64, arity), dtype=np.int32)
        self.n = 0
        # positions tuple -> [sorted keys (int64), row perm (int64), rows built]
        self._caches: dict[tuple[int, ...], list] = {}

    def rows_upto(self, m: int) -> np.ndarray:
        return self._buf[:m]

    @property
    def key_limit(self) -> int:
        return 1 << self.shift

    def append(self, rows: np.ndarray) -> tuple[int, int]:
        k = rows.shape[0]
        need = self.n + k
        if need > self._buf.shape[0]:
            cap = max(need, self._buf.shape[0] * 2)
            buf = np.empty((cap, self.arity), dtype=np.int32)
            buf[: self.n] = self._buf[: self.n]
            self._buf = buf
        self._buf[self.n : need] = rows
        start, self.n = self.n, need
        return start, need

    def encode(self, rows: np.ndarray, positions: Optional[tuple[int, ...]] = None) -> np.ndarray:
        if positions is not None and len(positions) != rows.shape[1]:
            rows = rows[:, list(positions)]
        return K.encode_cols(np.ascontiguousarray(rows), self.shift)

    def cache(self, positions: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Sorted packed keys over `positions` plus the row permutation.

        Built incrementally: new rows are encoded, sorted, and merged in.
        The cache always covers rows [0, self.n); callers restrict to a
        snapshot region by filtering the permutation.
        """
        entry = self._caches.get(positions)
        if entry is None:
            entry = [np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), 0]
            self._caches[positions] = entry
        keys, perm, built = entry
        if built < self.n:
            fresh = self._buf[built : self.n]
            fresh_keys = self.encode(fresh, positions)
            order = np.argsort(fresh_keys, kind="stable")
            fresh_sorted = fresh_keys[order]
            fresh_perm = order.astype(np.int64) + built
            keys, perm = K.merge_sorted(keys, perm, fresh_sorted, fresh_perm)
            entry[0], entry[1], entry[2] = keys, perm, self.n
        return entry[0], entry[1]

    def truncated_copy(self, m: int) -> "Arena":
        a = Arena.__new__(Arena)
        a.arity = self.arity
        a.shift = self.shift
        a._buf = self._buf[:m].copy()
        a.n = m
        a._caches = {}
        return a


class FactStore:
    """Mutable owner of a growing set of atoms; snapshots are Instances."""

    __slots__ = ("schema", "pool", "arenas")

    def __init__(self, schema: Optional[Schema] = None, pool: Optional[TermPool] = None) -> None:
        self.schema = schema if schema is not None else Schema()
        self.pool = pool if pool is not None else TermPool()
        self.arenas: dict[str, Arena] = {}

    # -- structure -----------------------------------------------------------

    def arena(self, predicate: str) -> Arena:
        a = self.arenas.get(predicate)
        if a is None:
            a = Arena(self.schema.arity(predicate))
            self.arenas[predicate] = a
        return a

    def counts(self) -> dict[str, int]:
        return {p: a.n for p, a in self.arenas.items()}

    def snapshot(self) -> Instance:
        return Instance(self, self.counts())

    def clone(self, counts: Optional[dict[str, int]] = None) -> "FactStore":
        s = FactStore(self.schema.copy(), self.pool.clone())
        for pred, arena in self.arenas.items():
            m = arena.n if counts is None else counts.get(pred, 0)
            s.arenas[pred] = arena.truncated_copy(m)
        return s

    # -- writes ---------------------------------------------------------------

    def insert_rows(self, predicate: str, rows: np.ndarray) -> np.ndarray:
        """Insert rows (int32, shape (k, arity)); returns the new-row mask.

        Duplicates, both within the batch (first occurrence wins) and against
        the existing arena, are dropped. The full-row key cache is kept
        current so later inserts and membership tests stay O(log n).
        """
        arena = self.arena(predicate)
        k = rows.shape[0]
        if k == 0:
            return np.empty(0, dtype=np.bool_)
        if rows.dtype != np.int32:
            rows = rows.astype(np.int32)
        if int(rows.max(initial=0)) >= arena.key_limit or int(rows.min(initial=0)) < 0:
            raise ModelError(
                f"term key out of range for arity-{arena.arity} predicate "
                f"{predicate}: the store supports at most {arena.key_limit} terms here"
            )
        all_pos = tuple(range(arena.arity))
        keys = arena.encode(rows)
        new_mask = K.first_occurrence(keys)
        existing, _ = arena.cache(all_pos)
        if existing.size:
            new_mask &= ~K.isin_sorted(keys, existing)
        if new_mask.any():
            arena.append(rows[new_mask])
            arena.cache(all_pos)  # fold the fresh rows into the dedup cache
        return new_mask

    def insert_atoms(
        self,
        atoms: Iterable[Atom],
        canonicalize_variables: bool = False,
        intern_nulls: bool = True,
    ) -> None:
        grouped: dict[str, list[list[int]]] = {}
        for a in atoms:
            if a.predicate not in self.schema:
                self.schema.declare(a.predicate, len(a.args))
            elif self.schema.arity(a.predicate) != len(a.args):
                raise ModelError(
                    f"atom {a} does not match declared arity "
                    f"{self.schema.arity(a.predicate)}"
                )
            row: list[int] = []
            for t in a.args:
                kind = term_kind(t)
                if kind == KIND_VARIABLE:
                    if not canonicalize_variables:
                        raise ModelError(f"variable {t} not allowed in this instance")
                    row.append(self.pool.input_var_null(t.name))
                elif kind == KIND_NULL and not intern_nulls:
                    raise ModelError(f"null {t} not allowed in this instance")
                else:
                    row.append(self.pool.intern(t))
            grouped.setdefault(a.predicate, []).append(row)
        for pred, rows in grouped.items():
            self.insert_rows(pred, np.array(rows, dtype=np.int32))

    # -- reads ----------------------------------------------------------------

    def contains_atom(self, a: Atom, counts: dict[str, int]) -> bool:
        limit = counts.get(a.predicate, 0)
        if limit == 0:
            return False
        arena = self.arenas[a.predicate]
        if len(a.args) != arena.arity:
            return False
        row = []
        for t in a.args:
            key = self.pool.key_of(t)
            if key is None:
                return False
            row.append(key)
        probe = np.array([row], dtype=np.int32)
        keys, perm = arena.cache(tuple(range(arena.arity)))
        starts, ends = K.lookup_ranges(arena.encode(probe), keys)
        s, e = int(starts[0]), int(ends[0])
        return bool((perm[s:e] < limit).any())

    def iter_atoms(
        self, counts: dict[str, int], only: Optional[str] = None
    ) -> Iterator[Atom]:
        preds = (only,) if only is not None else tuple(counts)
        for pred in preds:
            limit = counts.get(pred, 0)
            if limit == 0:
                continue
            arena = self.arenas[pred]
            rows = arena.rows_upto(limit)
            term_of = self.pool.term_of
            for i in range(limit):
                yield Atom(pred, tuple(term_of(int(k)) for k in rows[i]))

    def adom_keys(self, counts: dict[str, int]) -> np.ndarray:
        parts = [
            self.arenas[p].rows_upto(m).ravel()
            for p, m in counts.items()
            if m > 0
        ]
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(parts)).astype(np.int64)
