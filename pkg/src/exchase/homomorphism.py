"""Homomorphism, retraction, and BCQ evaluation over instances.

A homomorphism maps the variables and nulls of a source atom set into the
active domain of a target instance such that every mapped atom is present in
the target; constants map to themselves and cannot be rebound.

Two independent routes are provided on purpose:

- find_homomorphism: backtracking search with dynamic most-constrained-
  variable ordering and vectorized candidate filtering through the
  per-predicate sorted key caches of the target store. Deterministic:
  ties in the variable order break by term sort key, candidate images are
  tried in ascending term-key order.
- enumerate_homomorphisms: a brute-force enumerator over symbolic atoms,
  used as a test oracle. It shares no filtering code with the search.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from . import _kernels as K
from .model import (
    Atom,
    Constant,
    Instance,
    KIND_CONSTANT,
    ModelError,
    Null,
    Term,
    Variable,
    term_sort_key,
)

__all__ = [
    "Binding",
    "find_homomorphism",
    "exists_retraction",
    "evaluate_bcq",
    "enumerate_homomorphisms",
    "apply_binding",
]

# A (partial) binding: mappable term -> image term. Constants are implicit.
Binding = dict[Term, Term]

_SourceAtoms = Union[Instance, Iterable[Atom]]


def _is_mappable(t: Term) -> bool:
    return isinstance(t, (Variable, Null))


def apply_binding(atoms: Iterable[Atom], binding: Mapping[Term, Term]) -> list[Atom]:
    """Substitute a binding into atoms; unmapped terms stay put."""
    out = []
    for a in atoms:
        out.append(Atom(a.predicate, tuple(binding.get(t, t) for t in a.args)))
    return out


# ---------------------------------------------------------------------------
# Backtracking search
# ---------------------------------------------------------------------------

class _Dead(Exception):
    """Raised during problem construction when no homomorphism can exist."""


class _Problem:
    """A homomorphism search problem compiled against the target's arrays."""

    __slots__ = (
        "store",
        "counts",
        "var_terms",
        "nvars",
        "assign",
        "preassigned",
        "atom_pred",
        "atom_spec",
        "atom_vars",
        "remaining",
        "atoms_by_var",
        "adom_keys",
        "ground_rows",
    )

    # How many atoms per variable the candidate/ordering heuristics inspect.
    PROBE_ATOMS = 6

    def __init__(self, dst: Instance) -> None:
        self.store = dst._store
        self.counts = dst._counts
        self.var_terms: list[Term] = []
        self.nvars = 0
        self.assign: Optional[np.ndarray] = None
        self.preassigned: list[int] = []
        self.atom_pred: list[str] = []
        self.atom_spec: list[np.ndarray] = []
        self.atom_vars: list[tuple[int, ...]] = []
        self.remaining: Optional[np.ndarray] = None
        self.atoms_by_var: list[list[int]] = []
        self.adom_keys = self.store.adom_keys(self.counts)
        self.ground_rows: dict[str, list[np.ndarray]] = {}

    # -- construction -------------------------------------------------------

    def add_atom(self, pred: str, spec: list[int]) -> None:
        limit = self.counts.get(pred, 0)
        if limit == 0:
            raise _Dead
        arr = np.array(spec, dtype=np.int64)
        if (arr >= 0).all():
            # Atoms without mappable terms never enter the search; they are
            # verified in one vectorized pass per predicate.
            self.ground_rows.setdefault(pred, []).append(arr)
            return
        self.atom_pred.append(pred)
        self.atom_spec.append(arr)
        self.atom_vars.append(tuple(sorted({-s - 1 for s in spec if s < 0})))

    def add_ground_block(self, pred: str, rows: np.ndarray) -> None:
        if self.counts.get(pred, 0) == 0:
            raise _Dead
        self.ground_rows.setdefault(pred, []).append(rows)

    def finish(self, fixed_keys: dict[int, int]) -> None:
        self.nvars = len(self.var_terms)
        self.assign = np.full(self.nvars, -1, dtype=np.int64)
        for v, key in fixed_keys.items():
            self.assign[v] = key
            self.preassigned.append(v)
        self.remaining = np.array(
            [sum(1 for v in vs if self.assign[v] < 0) for vs in self.atom_vars],
            dtype=np.int32,
        )
        self.atoms_by_var = [[] for _ in range(self.nvars)]
        order = sorted(
            range(len(self.atom_pred)),
            key=lambda i: (len(self.atom_vars[i]), self.counts.get(self.atom_pred[i], 0)),
        )
        for i in order:
            for v in self.atom_vars[i]:
                self.atoms_by_var[v].append(i)

    # -- array helpers ------------------------------------------------------

    def _arena(self, pred: str):
        return self.store.arenas[pred]

    def _substitute(self, atom_ids: list[int]) -> dict[str, np.ndarray]:
        """Fully-assigned atoms -> per-predicate probe row matrices."""
        by_pred: dict[str, list[np.ndarray]] = {}
        for i in atom_ids:
            spec = self.atom_spec[i]
            idx = np.where(spec < 0, -spec - 1, 0)
            row = np.where(spec >= 0, spec, self.assign[idx])
            by_pred.setdefault(self.atom_pred[i], []).append(row)
        return {p: np.stack(rows) for p, rows in by_pred.items()}

    def _rows_present(self, pred: str, rows: np.ndarray) -> bool:
        arena = self._arena(pred)
        limit = self.counts.get(pred, 0)
        if bool((rows >= arena.key_limit).any()):
            # Keys this large cannot have been packed into this arena.
            return False
        keys, perm = arena.cache(tuple(range(arena.arity)))
        probe = arena.encode(rows.astype(np.int32))
        starts, ends = K.lookup_ranges(probe, keys)
        if bool((starts == ends).any()):
            return False
        p_idx, r_pos = K.expand_ranges(starts, ends)
        present = np.zeros(rows.shape[0], dtype=np.bool_)
        good = perm[r_pos] < limit
        present[p_idx[good]] = True
        return bool(present.all())

    def verify(self, atom_ids: list[int]) -> bool:
        if not atom_ids:
            return True
        for pred, rows in self._substitute(atom_ids).items():
            if not self._rows_present(pred, rows):
                return False
        return True

    # -- candidate machinery --------------------------------------------------

    def _bound_positions(self, i: int) -> tuple[tuple[int, ...], Optional[np.ndarray]]:
        spec = self.atom_spec[i]
        vals = np.where(spec >= 0, spec, -1)
        for pos, s in enumerate(spec):
            s = int(s)
            if s < 0 and self.assign[-s - 1] >= 0:
                vals[pos] = self.assign[-s - 1]
        bound = tuple(int(p) for p in np.flatnonzero(vals >= 0))
        if not bound:
            return (), None
        return bound, vals[list(bound)]

    def _estimate(self, i: int) -> int:
        """Upper bound on matching rows for atom i under current bounds."""
        pred = self.atom_pred[i]
        arena = self._arena(pred)
        bound, probe_vals = self._bound_positions(i)
        if not bound:
            return self.counts.get(pred, 0)
        if bool((probe_vals >= arena.key_limit).any()):
            return 0
        keys, _perm = arena.cache(bound)
        probe = arena.encode(probe_vals.reshape(1, -1).astype(np.int32))
        starts, ends = K.lookup_ranges(probe, keys)
        return int(ends[0] - starts[0])

    def _row_matches(self, i: int) -> np.ndarray:
        """Arena row indices (within the snapshot) matching atom i's bounds."""
        pred = self.atom_pred[i]
        arena = self._arena(pred)
        limit = self.counts.get(pred, 0)
        bound, probe_vals = self._bound_positions(i)
        if not bound:
            return np.arange(limit, dtype=np.int64)
        if bool((probe_vals >= arena.key_limit).any()):
            return np.empty(0, dtype=np.int64)
        keys, perm = arena.cache(bound)
        probe = arena.encode(probe_vals.reshape(1, -1).astype(np.int32))
        starts, ends = K.lookup_ranges(probe, keys)
        rows = perm[int(starts[0]) : int(ends[0])]
        return rows[rows < limit]

    def candidates(self, v: int) -> np.ndarray:
        """Candidate images for variable v, ascending by term key."""
        best_i = None
        best_est = None
        inspected = 0
        for i in self.atoms_by_var[v]:
            if self.remaining[i] != 1:
                continue
            est = self._estimate(i)
            if best_est is None or est < best_est:
                best_i, best_est = i, est
            inspected += 1
            if inspected >= self.PROBE_ATOMS or best_est == 0:
                break
        if best_i is None:
            return self.adom_keys
        rows = self._row_matches(best_i)
        if rows.size == 0:
            return rows
        arena = self._arena(self.atom_pred[best_i])
        spec = self.atom_spec[best_i]
        v_positions = [p for p, s in enumerate(spec) if int(s) < 0 and -int(s) - 1 == v]
        mat = arena.rows_upto(arena.n)[rows].astype(np.int64)
        col = mat[:, v_positions[0]]
        for p in v_positions[1:]:
            mask = mat[:, p] == col
            mat = mat[mask]
            col = col[mask]
        return np.unique(col)

    def pick(self, unassigned: list[int]) -> int:
        best_v = None
        best_key = None
        for v in unassigned:
            est = None
            inspected = 0
            for i in self.atoms_by_var[v]:
                if self.remaining[i] != 1:
                    continue
                e = self._estimate(i)
                est = e if est is None else min(est, e)
                inspected += 1
                if inspected >= self.PROBE_ATOMS or est == 0:
                    break
            if est is None:
                est = int(self.adom_keys.size)
            key = (est, term_sort_key(self.var_terms[v]))
            if best_key is None or key < best_key:
                best_v, best_key = v, key
        return best_v

    # -- search ---------------------------------------------------------------

    def solve(self) -> Optional[dict[Term, Term]]:
        for pred, blocks in self.ground_rows.items():
            if not self._rows_present(pred, np.vstack(blocks)):
                return None
        ground = [i for i in range(len(self.atom_pred)) if self.remaining[i] == 0]
        if not self.verify(ground):
            return None
        used: set[int] = set(self.preassigned)
        for vs in self.atom_vars:
            used.update(vs)
        unassigned = [v for v in sorted(used) if self.assign[v] < 0]
        if not self._extend(unassigned):
            return None
        term_of = self.store.pool.term_of
        return {
            self.var_terms[v]: term_of(int(self.assign[v])) for v in sorted(used)
        }

    def _extend(self, unassigned: list[int]) -> bool:
        if not unassigned:
            return True
        v = self.pick(unassigned)
        rest = [u for u in unassigned if u != v]
        affected = list(self.atoms_by_var[v])
        for c in self.candidates(v):
            self.assign[v] = int(c)
            ground: list[int] = []
            for i in affected:
                self.remaining[i] -= 1
                if self.remaining[i] == 0:
                    ground.append(i)
            if self.verify(ground) and self._extend(rest):
                return True
            for i in affected:
                self.remaining[i] += 1
        self.assign[v] = -1
        return False


def _build_problem(
    src: _SourceAtoms,
    extra: Iterable[Atom],
    dst: Instance,
    fixed: Optional[Mapping[Term, Term]],
) -> Optional[_Problem]:
    """Compile the search problem; None means provably no homomorphism."""
    problem = _Problem(dst)
    pool = dst._store.pool
    var_ids: dict[Term, int] = {}

    def var_id(t: Term) -> int:
        vid = var_ids.get(t)
        if vid is None:
            vid = len(problem.var_terms)
            var_ids[t] = vid
            problem.var_terms.append(t)
        return vid

    try:
        if isinstance(src, Instance):
            src_store = src._store
            src_pool = src_store.pool
            # Per-source-term translation: constant -> dst key, mappable -> var.
            # Constants the target never interned get a sentinel; only rows
            # actually containing one are fatal.
            absent = np.int64(2) ** 62
            trans = np.empty(len(src_pool), dtype=np.int64)
            for key, term in enumerate(src_pool.terms):
                if _is_mappable(term):
                    trans[key] = -var_id(term) - 1
                else:
                    dk = pool.key_of(term)
                    trans[key] = absent if dk is None else dk
            for pred, limit in src._counts.items():
                if limit == 0:
                    continue
                if problem.counts.get(pred, 0) == 0:
                    raise _Dead
                rows = trans[src_store.arenas[pred].rows_upto(limit)]
                if bool((rows == absent).any()):
                    raise _Dead
                has_var = (rows < 0).any(axis=1)
                ground = rows[~has_var]
                if ground.shape[0]:
                    problem.add_ground_block(pred, ground)
                for r in rows[has_var]:
                    problem.add_atom(pred, [int(x) for x in r])
        else:
            for a in src:
                spec = []
                for t in a.args:
                    if _is_mappable(t):
                        spec.append(-var_id(t) - 1)
                    else:
                        dk = pool.key_of(t)
                        if dk is None:
                            raise _Dead
                        spec.append(dk)
                problem.add_atom(a.predicate, spec)
        for a in extra:
            spec = []
            for t in a.args:
                if _is_mappable(t):
                    spec.append(-var_id(t) - 1)
                else:
                    dk = pool.key_of(t)
                    if dk is None:
                        raise _Dead
                    spec.append(dk)
            problem.add_atom(a.predicate, spec)

        fixed_keys: dict[int, int] = {}
        if fixed:
            adom_set = {int(k) for k in problem.adom_keys}
            for t, image in fixed.items():
                if isinstance(t, Constant):
                    if t != image:
                        raise ModelError(f"constant {t.name} cannot be rebound")
                    continue
                if not _is_mappable(t):
                    raise ModelError(f"cannot fix non-term {t!r}")
                ik = pool.key_of(image)
                if ik is None or ik not in adom_set:
                    # An image outside the target's active domain can never
                    # take part in a homomorphism.
                    raise _Dead
                if t in var_ids:
                    fixed_keys[var_ids[t]] = ik
        problem.finish(fixed_keys)
    except _Dead:
        return None
    return problem


def find_homomorphism(
    src: _SourceAtoms,
    dst: Instance,
    fixed: Optional[Mapping[Term, Term]] = None,
) -> Optional[Binding]:
    """A complete binding h extending `fixed` with h(src) ⊆ dst, or None.

    Variables and nulls of src are mappable; constants map to themselves.
    Deterministic for identical inputs.
    """
    problem = _build_problem(src, (), dst, fixed)
    if problem is None:
        return None
    solution = problem.solve()
    if solution is None:
        return None
    result: Binding = {t: img for t, img in (fixed or {}).items() if _is_mappable(t)}
    result.update(solution)
    return result


def exists_retraction(big: Instance, small: Instance) -> bool:
    """True iff some homomorphism big -> small fixes every shared term.

    The shared-term identity constraint is derived from
    adom(big) ∩ adom(small); constants are fixed regardless.
    """
    shared = big.active_domain() & small.active_domain()
    fixed = {t: t for t in shared if _is_mappable(t)}
    problem = _build_problem(big, (), small, fixed)
    if problem is None:
        return False
    return problem.solve() is not None


def evaluate_bcq(q: Iterable[Atom], instance: Instance) -> bool:
    """True iff the Boolean conjunctive query q maps into the instance."""
    q = list(q)
    for a in q:
        for t in a.args:
            if isinstance(t, Null):
                raise ModelError(f"query atom {a} contains a null")
    return find_homomorphism(q, instance, None) is not None


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def enumerate_homomorphisms(
    src: Iterable[Atom], dst: Instance, cap: int
) -> list[Binding]:
    """All homomorphisms src -> dst in deterministic order, truncated at cap.

    Brute force: tries every assignment of mappable terms to active-domain
    elements (lexicographic in the sorted active domain) and keeps those
    under which every atom is present. Intended as a test oracle; the search
    space is |adom(dst)| ** |vars(src)|.
    """
    if cap <= 0:
        return []
    src = list(src)
    dst_atoms = dst.to_frozenset()
    mappable: list[Term] = []
    seen: set[Term] = set()
    for a in src:
        for t in a.args:
            if _is_mappable(t) and t not in seen:
                seen.add(t)
                mappable.append(t)
    mappable.sort(key=term_sort_key)
    adom = sorted(dst.active_domain(), key=term_sort_key)
    results: list[Binding] = []
    if not mappable:
        if all(a in dst_atoms for a in src):
            results.append({})
        return results
    if not adom:
        return []
    for images in itertools.product(adom, repeat=len(mappable)):
        binding = dict(zip(mappable, images))
        ok = True
        for a in src:
            image = Atom(a.predicate, tuple(binding.get(t, t) for t in a.args))
            if image not in dst_atoms:
                ok = False
                break
        if ok:
            results.append(binding)
            if len(results) >= cap:
                break
    return results
