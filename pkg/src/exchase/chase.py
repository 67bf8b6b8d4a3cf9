"""The four chase variants over existential rules.

Variants: "o" fires a trigger unless its remembered output is already
present; "so" names fresh nulls by Skolem terms over the frontier image, so
the same check covers every trigger sharing that image; "r" fires unless the
trigger output can be folded back into the instance while fixing everything
the instance already knows (no retraction); "e" fires unless the whole
enlarged instance maps homomorphically back (no homomorphism).

Execution is round-based: round 0 closes the instance under the Datalog
rules; every later round enumerates the non-Datalog triggers on the
round-start instance, fires the variant-applicable ones in a deterministic
order (each re-checked against the current instance just before firing),
and closes under the Datalog rules again. A round that adds nothing ends
the chase. Datalog rules behave identically under all four variants, which
is why they can be saturated in bulk with semi-naive evaluation.

Null bookkeeping lives in the term pool: per-trigger nulls are memoized on
(rule id, full body binding), Skolem nulls on (rule id, existential var,
frontier image). Enumerating triggers may intern bookkeeping nulls into an
instance's pool, but never adds atoms.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .homomorphism import _build_problem, find_homomorphism
from .model import (
    Atom,
    Instance,
    KnowledgeBase,
    ModelError,
    Null,
    Rule,
    RuleError,
    Term,
    Variable,
    render_term,
    validate_rule,
)

__all__ = [
    "VARIANTS",
    "Trigger",
    "DerivationStep",
    "Derivation",
    "ChaseStatus",
    "ChaseOutcome",
    "enumerate_triggers",
    "is_applicable",
    "datalog_saturate",
    "step",
    "run_chase",
]

VARIANTS = ("o", "so", "r", "e")


def _normalize_variant(v: str) -> str:
    try:
        lv = v.lower()
    except AttributeError:
        lv = ""
    if lv not in VARIANTS:
        raise ModelError(f"unknown chase variant {v!r}; expected one of {VARIANTS}")
    return lv


# ---------------------------------------------------------------------------
# Public trigger / derivation types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trigger:
    """A rule plus a homomorphism from its body into some instance.

    binding is ordered by first occurrence of the variable in the body;
    supp is the instantiated body, out the instantiated head with each
    existential variable replaced by a null per the naming scheme in force
    when the trigger was enumerated.
    """

    rule: Rule
    binding: tuple[tuple[Variable, Term], ...]
    supp: frozenset[Atom]
    out: frozenset[Atom]

    def binding_dict(self) -> dict[Variable, Term]:
        return dict(self.binding)

    def __str__(self) -> str:
        pairs = ", ".join(f"{v.name}={render_term(t)}" for v, t in self.binding)
        return f"<{self.rule.id}: {pairs}>"


@dataclass(frozen=True)
class DerivationStep:
    """One recorded event: the initial instance, a trigger firing, or one
    batched Datalog saturation. `instance` is the snapshot after the event."""

    round: int
    kind: str  # "initial" | "fire" | "datalog"
    trigger: Optional[Trigger]
    new_atoms: int
    instance: Instance


@dataclass(frozen=True)
class Derivation:
    variant: str
    steps: tuple[DerivationStep, ...]
    trace_lines: tuple[str, ...] = ()

    def render_trace(self) -> str:
        return "\n".join(self.trace_lines)


@dataclass(frozen=True)
class ChaseStatus:
    kind: str  # "terminated" | "bound_reached"
    rounds: int

    @property
    def is_terminated(self) -> bool:
        return self.kind == "terminated"

    def __str__(self) -> str:
        return f"{self.kind}({self.rounds})"


@dataclass(frozen=True)
class ChaseOutcome:
    status: ChaseStatus
    result: Instance
    derivation: Derivation


# ---------------------------------------------------------------------------
# Rule compilation
# ---------------------------------------------------------------------------

class _BodyAtom:
    __slots__ = (
        "pred",
        "shared_positions",
        "probe_cols",
        "new_positions",
        "new_cols",
        "eq_pairs",
    )

    def __init__(self, pred: str) -> None:
        self.pred = pred
        self.shared_positions: tuple[int, ...] = ()
        self.probe_cols: tuple[int, ...] = ()
        self.new_positions: tuple[int, ...] = ()
        self.new_cols: tuple[int, ...] = ()
        self.eq_pairs: tuple[tuple[int, int], ...] = ()


class _CompiledRule:
    """Join-ready form of a rule: variables as dense columns, head atoms as
    index matrices into the (binding ++ existential nulls) value vector."""

    __slots__ = (
        "rule",
        "rid",
        "var_order",
        "var_index",
        "body",
        "existential_names",
        "frontier_cols",
        "head_groups",
        "is_datalog",
    )

    def __init__(self, rule: Rule) -> None:
        self.rule = rule
        self.rid = rule.id
        self.var_order = [v.name for v in rule.body_variables()]
        self.var_index = {name: c for c, name in enumerate(self.var_order)}
        self.is_datalog = rule.is_datalog
        self.existential_names = sorted(v.name for v in rule.existentials)
        frontier_names = sorted(v.name for v in rule.frontier)
        self.frontier_cols = tuple(self.var_index[n] for n in frontier_names)

        self.body: list[_BodyAtom] = []
        seen: set[str] = set()
        for a in rule.body:
            ba = _BodyAtom(a.predicate)
            shared: list[int] = []
            probe: list[int] = []
            new_pos: list[int] = []
            new_cols: list[int] = []
            eq: list[tuple[int, int]] = []
            first_new_pos: dict[str, int] = {}
            for pos, t in enumerate(a.args):
                name = t.name
                if name in seen:
                    shared.append(pos)
                    probe.append(self.var_index[name])
                elif name in first_new_pos:
                    eq.append((first_new_pos[name], pos))
                else:
                    first_new_pos[name] = pos
                    new_pos.append(pos)
                    new_cols.append(self.var_index[name])
            seen.update(first_new_pos)
            ba.shared_positions = tuple(shared)
            ba.probe_cols = tuple(probe)
            ba.new_positions = tuple(new_pos)
            ba.new_cols = tuple(new_cols)
            ba.eq_pairs = tuple(eq)
            self.body.append(ba)

        nvars = len(self.var_order)
        exist_slot = {
            name: nvars + i for i, name in enumerate(self.existential_names)
        }
        grouped: dict[str, list[list[int]]] = {}
        for a in rule.head:
            idx_row = [
                self.var_index[t.name]
                if t.name in self.var_index
                else exist_slot[t.name]
                for t in a.args
            ]
            grouped.setdefault(a.predicate, []).append(idx_row)
        self.head_groups = [
            (pred, np.array(rows, dtype=np.int64)) for pred, rows in grouped.items()
        ]


# Placeholder nulls stand in for not-yet-invented trigger outputs during
# applicability checks; negative ids keep them apart from every pool null.
def _placeholder_nulls(n: int) -> list[Null]:
    return [Null(-(i + 1), ("candidate",)) for i in range(n)]


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class _Engine:
    """Owns one mutable store and drives rounds over it."""

    def __init__(
        self,
        rules: Sequence[Rule],
        instance: Instance,
        variant: str,
        trace: bool = False,
        order_seed: Optional[int] = None,
    ) -> None:
        self.variant = variant
        self.trace = trace
        self.order_seed = order_seed
        self.rules = list(rules)
        self.store = instance._store.clone(instance._counts)
        self.pool = self.store.pool
        schema = self.store.schema
        for r in self.rules:
            for a in list(r.body) + list(r.head):
                if a.predicate in schema:
                    if schema.arity(a.predicate) != len(a.args):
                        raise ModelError(
                            f"rule {r.id} uses {a.predicate} with arity "
                            f"{len(a.args)}, instance declares "
                            f"{schema.arity(a.predicate)}"
                        )
                else:
                    schema.declare(a.predicate, len(a.args))
                self.store.arena(a.predicate)
        self.compiled = [_CompiledRule(r) for r in self.rules]
        self.datalog_rules = [c for c in self.compiled if c.is_datalog]
        self.existential_rules = [c for c in self.compiled if not c.is_datalog]
        self.plans_by_pred: dict[str, list[tuple[_CompiledRule, int]]] = {}
        for c in self.datalog_rules:
            for j, ba in enumerate(c.body):
                self.plans_by_pred.setdefault(ba.pred, []).append((c, j))
        self._last_saturated: dict[str, int] = {p: 0 for p in self.store.arenas}
        self.steps: list[DerivationStep] = []
        self.trace_lines: list[str] = []
        self._record("initial", 0, None, 0)

    # -- bookkeeping ----------------------------------------------------------

    def _record(
        self, kind: str, round_no: int, trigger: Optional[Trigger], new_atoms: int
    ) -> None:
        self.steps.append(
            DerivationStep(round_no, kind, trigger, new_atoms, self.store.snapshot())
        )

    def derivation(self) -> Derivation:
        return Derivation(self.variant, tuple(self.steps), tuple(self.trace_lines))

    # -- joins ----------------------------------------------------------------

    def _execute(
        self,
        crule: _CompiledRule,
        j: Optional[int],
        prev: Optional[dict[str, int]],
        start: dict[str, int],
    ) -> Optional[np.ndarray]:
        """Bindings of crule's body where atom j (if given) hits the delta
        region [prev, start), atoms before j the pre-delta region, and atoms
        after j the full region. Returns (n, nvars) int32 or None if empty."""
        store = self.store
        bindings: Optional[np.ndarray] = None
        for k, ba in enumerate(crule.body):
            arena = store.arenas[ba.pred]
            if j is not None and k < j:
                lo, hi = 0, prev.get(ba.pred, 0)
            elif j is not None and k == j:
                lo, hi = prev.get(ba.pred, 0), start.get(ba.pred, 0)
            else:
                lo, hi = 0, start.get(ba.pred, 0)
            if hi <= lo:
                return None
            if bindings is None:
                rows = arena.rows_upto(hi)[lo:]
                for p1, p2 in ba.eq_pairs:
                    rows = rows[rows[:, p1] == rows[:, p2]]
                bindings = rows[:, list(ba.new_positions)].astype(np.int32)
                if bindings.shape[0] == 0:
                    return None
                continue
            if ba.shared_positions:
                probe = bindings[:, list(ba.probe_cols)]
                valid = (probe < arena.key_limit).all(axis=1)
                if not valid.all():
                    bindings = bindings[valid]
                    probe = probe[valid]
                    if bindings.shape[0] == 0:
                        return None
                keys, perm = arena.cache(ba.shared_positions)
                probe_keys = K.encode_cols(
                    np.ascontiguousarray(probe), arena.shift
                )
                starts, ends = K.lookup_ranges(probe_keys, keys)
                p_idx, r_pos = K.expand_ranges(starts, ends)
                r = perm[r_pos]
                mask = (r >= lo) & (r < hi)
                p_idx, r = p_idx[mask], r[mask]
            else:
                n = bindings.shape[0]
                m = hi - lo
                p_idx = np.repeat(np.arange(n, dtype=np.int64), m)
                r = np.tile(np.arange(lo, hi, dtype=np.int64), n)
            if p_idx.size == 0:
                return None
            rows = arena.rows_upto(arena.n)[r]
            if ba.eq_pairs:
                emask = np.ones(rows.shape[0], dtype=np.bool_)
                for p1, p2 in ba.eq_pairs:
                    emask &= rows[:, p1] == rows[:, p2]
                p_idx, rows = p_idx[emask], rows[emask]
                if p_idx.size == 0:
                    return None
            if ba.new_positions:
                bindings = np.hstack(
                    (bindings[p_idx], rows[:, list(ba.new_positions)])
                )
            else:
                bindings = bindings[p_idx]
        if bindings is None or bindings.shape[0] == 0:
            return None
        return bindings

    @staticmethod
    def _lexsorted(bindings: np.ndarray) -> np.ndarray:
        if bindings.shape[0] <= 1 or bindings.shape[1] == 0:
            return bindings
        order = np.lexsort(tuple(bindings[:, c] for c in range(bindings.shape[1] - 1, -1, -1)))
        return bindings[order]

    # -- Datalog saturation -----------------------------------------------------

    def saturate(self, round_no: int) -> int:
        """Close the store under the Datalog rules, treating everything
        inserted since the previous saturation as the seed delta."""
        store = self.store
        prev = self._last_saturated
        total_new = 0
        while True:
            start = store.counts()
            live = [q for q, n in start.items() if n > prev.get(q, 0)]
            if not live:
                break
            iter_start = dict(start)
            for q in live:
                for crule, j in self.plans_by_pred.get(q, ()):
                    bindings = self._execute(crule, j, prev, iter_start)
                    if bindings is None:
                        continue
                    bindings = self._lexsorted(bindings)
                    total_new += self._insert_datalog(crule, bindings, round_no)
            prev = iter_start
        self._last_saturated = store.counts()
        return total_new

    def _insert_datalog(
        self, crule: _CompiledRule, bindings: np.ndarray, round_no: int
    ) -> int:
        store = self.store
        n = bindings.shape[0]
        per_binding = (
            np.zeros(n, dtype=np.int64) if self.trace else None
        )
        total = 0
        b64 = bindings.astype(np.int64)
        for pred, idx in crule.head_groups:
            m, arity = idx.shape
            rows = b64[:, idx.ravel()].reshape(n * m, arity)
            mask = store.insert_rows(pred, rows)
            if mask.size:
                total += int(mask.sum())
                if per_binding is not None:
                    per_binding += mask.reshape(n, m).sum(axis=1)
        if per_binding is not None and total:
            names = crule.var_order
            term_of = self.pool.term_of
            for i in np.flatnonzero(per_binding):
                rendered = ",".join(
                    f"{names[c]}={render_term(term_of(int(bindings[i, c])))}"
                    for c in range(len(names))
                )
                self.trace_lines.append(
                    f"round {round_no} rule {crule.rid} binding {rendered} "
                    f"new {int(per_binding[i])} atoms"
                )
        return total

    # -- existential rounds ------------------------------------------------------

    def sweep(self, round_no: int) -> int:
        """Enumerate non-Datalog triggers on the round-start instance and fire
        the applicable ones in order; returns atoms added (sweep only)."""
        start = self.store.counts()
        queue: list[tuple[_CompiledRule, np.ndarray]] = []
        for crule in self.existential_rules:
            bindings = self._execute(crule, None, None, start)
            if bindings is None:
                continue
            queue.append((crule, self._lexsorted(bindings)))
        items: list[tuple[_CompiledRule, np.ndarray]] = []
        for crule, bindings in queue:
            for i in range(bindings.shape[0]):
                items.append((crule, bindings[i]))
        if self.order_seed is not None and len(items) > 1:
            rng = random.Random(self.order_seed * 1000003 + round_no)
            rng.shuffle(items)
        new_total = 0
        for crule, row in items:
            if self._applicable_now(crule, row):
                new_total += self._fire(crule, row, round_no)
        return new_total

    # Per-variant applicability against the live store.

    def _applicable_now(self, crule: _CompiledRule, row: np.ndarray) -> bool:
        v = self.variant
        binding_keys = tuple(int(x) for x in row)
        if v == "o":
            nulls = self.pool.peek_trigger_nulls(crule.rid, binding_keys)
            if nulls is None:
                return True
            return not self._out_present(crule, row, nulls)
        if v == "so":
            frontier = tuple(binding_keys[c] for c in crule.frontier_cols)
            nulls = []
            for name in crule.existential_names:
                key = self.pool.peek_skolem(crule.rid, name, frontier)
                if key is None:
                    return True
                nulls.append(key)
            return not self._out_present(crule, row, tuple(nulls))
        # r / e need the instantiated head with candidate nulls.
        nulls = self.pool.peek_trigger_nulls(crule.rid, binding_keys)
        if nulls is not None and self._out_present(crule, row, nulls):
            return False
        out_atoms = self._out_atoms(crule, row, None)
        snap = self.store.snapshot()
        if v == "r":
            adom = snap.active_domain()
            fixed = {
                u: u
                for a in out_atoms
                for u in a.args
                if isinstance(u, (Variable, Null)) and u in adom
            }
            return find_homomorphism(out_atoms, snap, fixed) is None
        problem = _build_problem(snap, out_atoms, snap, None)
        if problem is None:
            return True
        return problem.solve() is None

    def _out_present(
        self, crule: _CompiledRule, row: np.ndarray, nulls: tuple[int, ...]
    ) -> bool:
        vals = np.concatenate(
            [row.astype(np.int64), np.asarray(nulls, dtype=np.int64)]
        )
        for pred, idx in crule.head_groups:
            arena = self.store.arenas[pred]
            m, arity = idx.shape
            rows = vals[idx.ravel()].reshape(m, arity)
            if bool((rows >= arena.key_limit).any()):
                return False
            keys, _ = arena.cache(tuple(range(arity)))
            probe = K.encode_cols(
                np.ascontiguousarray(rows.astype(np.int32)), arena.shift
            )
            starts, ends = K.lookup_ranges(probe, keys)
            if bool((starts == ends).any()):
                return False
        return True

    def _out_atoms(
        self,
        crule: _CompiledRule,
        row: np.ndarray,
        null_keys: Optional[tuple[int, ...]],
    ) -> list[Atom]:
        term_of = self.pool.term_of
        if null_keys is None:
            null_terms = _placeholder_nulls(len(crule.existential_names))
        else:
            null_terms = [term_of(k) for k in null_keys]
        env: dict[str, Term] = {
            name: term_of(int(row[c])) for name, c in crule.var_index.items()
        }
        for name, t in zip(crule.existential_names, null_terms):
            env[name] = t
        return [
            Atom(a.predicate, tuple(env[t.name] for t in a.args))
            for a in crule.rule.head
        ]

    def _fire(self, crule: _CompiledRule, row: np.ndarray, round_no: int) -> int:
        binding_keys = tuple(int(x) for x in row)
        if self.variant == "so":
            frontier = tuple(binding_keys[c] for c in crule.frontier_cols)
            nulls = tuple(
                self.pool.skolem_null(crule.rid, name, frontier)
                for name in crule.existential_names
            )
        else:
            nulls = self.pool.nulls_for_trigger(
                crule.rid, binding_keys, len(crule.existential_names)
            )
        vals = np.concatenate(
            [row.astype(np.int64), np.asarray(nulls, dtype=np.int64)]
        )
        new_total = 0
        for pred, idx in crule.head_groups:
            m, arity = idx.shape
            rows = vals[idx.ravel()].reshape(m, arity)
            mask = self.store.insert_rows(pred, rows)
            if mask.size:
                new_total += int(mask.sum())
        trigger = self._symbolic_trigger(crule, row, nulls)
        self._record("fire", round_no, trigger, new_total)
        if self.trace:
            pairs = ",".join(
                f"{name}={render_term(self.pool.term_of(int(row[c])))}"
                for c, name in enumerate(crule.var_order)
            )
            self.trace_lines.append(
                f"round {round_no} rule {crule.rid} binding {pairs} "
                f"new {new_total} atoms"
            )
        return new_total

    def _symbolic_trigger(
        self, crule: _CompiledRule, row: np.ndarray, nulls: tuple[int, ...]
    ) -> Trigger:
        term_of = self.pool.term_of
        binding = tuple(
            (Variable(name), term_of(int(row[c])))
            for c, name in enumerate(crule.var_order)
        )
        env = {name: t for (v, t), name in zip(binding, crule.var_order)}
        supp = frozenset(
            Atom(a.predicate, tuple(env[t.name] for t in a.args))
            for a in crule.rule.body
        )
        out = frozenset(self._out_atoms(crule, row, nulls))
        return Trigger(crule.rule, binding, supp, out)

    # -- driver ---------------------------------------------------------------

    def run(self, max_rounds: int) -> ChaseOutcome:
        new0 = self.saturate(0)
        self._record("datalog", 0, None, new0)
        status: Optional[ChaseStatus] = None
        if not self.existential_rules:
            status = ChaseStatus("terminated", 0)
        else:
            grown = 0
            for round_no in range(1, max_rounds + 1):
                fired = self.sweep(round_no)
                sat = self.saturate(round_no)
                self._record("datalog", round_no, None, sat)
                if fired + sat == 0:
                    status = ChaseStatus("terminated", grown)
                    break
                grown = round_no
            if status is None:
                status = ChaseStatus("bound_reached", max_rounds)
        return ChaseOutcome(status, self.store.snapshot(), self.derivation())


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def enumerate_triggers(
    rule: Rule, instance: Instance, naming: str = "trigger"
) -> list[Trigger]:
    """All triggers of `rule` on `instance`, bindings in lexicographic
    term-key order.

    naming selects the null scheme for the out-sets: "trigger" (per-firing
    nulls, the o/r/e scheme) or "skolem" (frontier-functional nulls, the so
    scheme). Looking up the nulls may intern fresh bookkeeping entries in the
    instance's term pool; the instance's atoms are never touched.
    """
    if naming not in ("trigger", "skolem"):
        raise ModelError(f"unknown naming scheme {naming!r}")
    err = validate_rule(rule)
    if err:
        raise RuleError(err)
    store = instance._store
    pool = store.pool
    for a in rule.body:
        if instance._counts.get(a.predicate, 0) == 0:
            return []
        if store.arenas[a.predicate].arity != len(a.args):
            # A body atom of the wrong arity can never bind.
            return []
    crule = _CompiledRule(rule)
    # Borrow an engine shell for the join only; the store is not mutated.
    shell = _Engine.__new__(_Engine)
    shell.store = store
    shell.pool = pool
    bindings = _Engine._execute(shell, crule, None, None, dict(instance._counts))
    if bindings is None:
        return []
    bindings = _Engine._lexsorted(bindings)
    triggers: list[Trigger] = []
    for i in range(bindings.shape[0]):
        row = bindings[i]
        binding_keys = tuple(int(x) for x in row)
        if naming == "skolem":
            frontier = tuple(binding_keys[c] for c in crule.frontier_cols)
            nulls = tuple(
                pool.skolem_null(crule.rid, name, frontier)
                for name in crule.existential_names
            )
        else:
            nulls = pool.nulls_for_trigger(
                crule.rid, binding_keys, len(crule.existential_names)
            )
        triggers.append(_Engine._symbolic_trigger(shell, crule, row, nulls))
    return triggers


def is_applicable(t: Trigger, instance: Instance, variant: str) -> bool:
    """Whether trigger t may fire on `instance` under the given variant.

    Side-effect free: never interns nulls or atoms.
    """
    v = _normalize_variant(variant)
    contains = instance.__contains__
    out_present = all(contains(a) for a in t.out)
    if v == "o":
        return not out_present
    if v == "so":
        # Re-derive the out-set under Skolem naming from the frontier image;
        # unknown Skolems mean the image was never fired, hence applicable.
        pool = instance._store.pool
        rule = t.rule
        bd = t.binding_dict()
        env: dict[str, Term] = {}
        keys = []
        for x in sorted(rule.frontier, key=lambda u: u.name):
            image = bd[x]
            k = pool.key_of(image)
            if k is None:
                return True
            keys.append(k)
            env[x.name] = image
        frontier_keys = tuple(keys)
        for x in rule.existentials:
            sk = pool.peek_skolem(rule.id, x.name, frontier_keys)
            if sk is None:
                return True
            env[x.name] = pool.term_of(sk)
        so_out = [
            Atom(a.predicate, tuple(env[u.name] for u in a.args)) for a in rule.head
        ]
        return not all(contains(a) for a in so_out)
    if out_present:
        # I ∪ out = I, and the identity is both a retraction and a
        # homomorphism, so neither r nor e lets the trigger fire.
        return False
    if v == "r":
        adom = instance.active_domain()
        fixed = {
            u: u
            for a in t.out
            for u in a.args
            if isinstance(u, (Variable, Null)) and u in adom
        }
        return find_homomorphism(sorted(t.out, key=str), instance, fixed) is None
    problem = _build_problem(instance, sorted(t.out, key=str), instance, None)
    if problem is None:
        return True
    return problem.solve() is None


def datalog_saturate(I: Instance, rules: Sequence[Rule]) -> Instance:
    """Least fixpoint of I under Datalog rules (semi-naive evaluation)."""
    rules = list(rules)
    for r in rules:
        if not r.is_datalog:
            raise RuleError(f"rule {r.id} has existential variables")
    eng = _Engine(rules, I, "o")
    eng.saturate(0)
    return eng.store.snapshot()


def step(I: Instance, rules: Sequence[Rule], variant: str) -> Instance:
    """One chase round: fire applicable non-Datalog triggers enumerated on I
    (re-checking each against the current instance), then Datalog-saturate."""
    v = _normalize_variant(variant)
    eng = _Engine(rules, I, v)
    eng.sweep(1)
    eng.saturate(1)
    return eng.store.snapshot()


def run_chase(
    kb: KnowledgeBase,
    variant: str,
    max_rounds: int,
    *,
    trace: bool = False,
    order_seed: Optional[int] = None,
) -> ChaseOutcome:
    """Round 0 Datalog-saturates; each later round sweeps the non-Datalog
    triggers and saturates again, until a round adds nothing (terminated(n)
    with n the number of growing rounds) or max_rounds is exhausted
    (bound_reached(max_rounds)). Rule sets without existential rules
    terminate at round 0 without sweeping.
    """
    v = _normalize_variant(variant)
    if max_rounds < 0:
        raise ModelError("max_rounds must be >= 0")
    eng = _Engine(kb.rules, kb.instance, v, trace=trace, order_seed=order_seed)
    return eng.run(max_rounds)
