"""Terms, atoms, instances, rules, and knowledge bases.

The data model is deliberately small: three kinds of terms (constants,
variables, labeled nulls), predicate atoms with registry-checked arities,
immutable instances (finite atom sets with per-predicate indexes and a cached
active domain), and rules whose frontier/existential variable groups are
computed once at construction.

Instances are snapshots over an append-only columnar store (see _store.py),
so taking a snapshot of a growing derivation is O(1) and old snapshots stay
valid while the derivation grows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Optional

import numpy as np

__all__ = [
    "Term",
    "Constant",
    "Variable",
    "Null",
    "Atom",
    "Schema",
    "SchemaError",
    "ModelError",
    "RuleError",
    "Instance",
    "Rule",
    "KnowledgeBase",
    "active_domain",
    "atoms_by_predicate",
    "validate_rule",
    "term_sort_key",
    "render_term",
]


class ModelError(ValueError):
    """A well-formedness invariant of the data model was violated."""


class SchemaError(ModelError):
    """Predicate registry violation: arity conflict or illegal arity."""


class RuleError(ModelError):
    """A rule violates the rule well-formedness invariants."""


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Term:
    """Base class for constants, variables, and labeled nulls.

    Equality is structural and the three kinds never compare equal to each
    other.
    """


@dataclass(frozen=True, slots=True)
class Constant(Term):
    name: str


@dataclass(frozen=True, slots=True)
class Variable(Term):
    name: str


@dataclass(frozen=True, slots=True)
class Null(Term):
    """A labeled null. `id` is unique within one derivation store.

    `provenance` is an opaque hashable tag recording how the null was
    invented (rule id, existential variable, and for Skolem naming the
    frontier image). It participates in equality so that Skolem-named nulls
    built independently from the same key coincide.
    """

    id: int
    provenance: Hashable = None


KIND_CONSTANT = 0
KIND_VARIABLE = 1
KIND_NULL = 2


def term_kind(t: Term) -> int:
    if isinstance(t, Constant):
        return KIND_CONSTANT
    if isinstance(t, Variable):
        return KIND_VARIABLE
    if isinstance(t, Null):
        return KIND_NULL
    raise ModelError(f"not a term: {t!r}")


def term_sort_key(t: Term):
    """Total deterministic order: constants < variables < nulls."""
    if isinstance(t, Constant):
        return (0, t.name)
    if isinstance(t, Variable):
        return (1, t.name)
    if isinstance(t, Null):
        return (2, t.id)
    raise ModelError(f"not a term: {t!r}")


def render_term(t: Term) -> str:
    """Render a term the way traces and the text formats spell it."""
    if isinstance(t, Constant):
        return t.name
    if isinstance(t, Variable):
        # Lowercase variable names need the explicit marker to stay
        # distinguishable from constants in the surface syntax.
        return t.name if t.name[:1].isupper() else "?" + t.name
    if isinstance(t, Null):
        return f"_n{t.id}"
    raise ModelError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Atom:
    """A predicate applied to a tuple of terms."""

    predicate: str
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def variables(self) -> frozenset[Variable]:
        return frozenset(t for t in self.args if isinstance(t, Variable))

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(render_term(t) for t in self.args)})"


def atom(predicate: str, *args: Term) -> Atom:
    return Atom(predicate, tuple(args))


# ---------------------------------------------------------------------------
# Predicate registry
# ---------------------------------------------------------------------------

class Schema:
    """Predicate registry: each predicate is declared once, at a fixed arity.

    Arity must be between 1 and 15; using a predicate at two arities is
    rejected. 15 is the largest arity for which packed row keys (63 bits
    split evenly across columns) still distinguish at least 16 terms.
    """

    __slots__ = ("_arity",)

    MAX_ARITY = 15

    def __init__(self, arities: Optional[dict[str, int]] = None) -> None:
        self._arity: dict[str, int] = {}
        if arities:
            for name, ar in arities.items():
                self.declare(name, ar)

    def declare(self, name: str, arity: int) -> None:
        if not name:
            raise SchemaError("predicate name must be non-empty")
        if not 1 <= arity <= self.MAX_ARITY:
            raise SchemaError(
                f"predicate {name}: arity must be between 1 and {self.MAX_ARITY}, got {arity}"
            )
        known = self._arity.get(name)
        if known is None:
            self._arity[name] = arity
        elif known != arity:
            raise SchemaError(
                f"predicate {name} used at arity {arity} but declared at arity {known}"
            )

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise SchemaError(f"unknown predicate: {name}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._arity

    def predicates(self) -> tuple[str, ...]:
        return tuple(self._arity)

    def items(self) -> Iterator[tuple[str, int]]:
        return iter(self._arity.items())

    def copy(self) -> "Schema":
        s = Schema()
        s._arity = dict(self._arity)
        return s

    def merge(self, other: "Schema") -> None:
        for name, ar in other.items():
            self.declare(name, ar)

    def __repr__(self) -> str:
        return f"Schema({self._arity!r})"


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

class Instance:
    """An immutable finite set of atoms with per-predicate indexes.

    Snapshots share the underlying append-only store; the per-predicate row
    counts pin which prefix of each arena belongs to this instance.

    Input variables are canonicalized to frozen nulls at construction:
    instances are existentially closed, so a variable in an input instance is
    semantically a null. Chase-produced instances contain real nulls.
    """

    __slots__ = ("_store", "_counts", "_len", "_adom", "_fs")

    def __init__(self, store, counts: dict[str, int]) -> None:
        self._store = store
        self._counts = counts
        self._len = sum(counts.values())
        self._adom: Optional[frozenset[Term]] = None
        self._fs: Optional[frozenset[Atom]] = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_atoms(
        cls, atoms: Iterable[Atom], schema: Optional[Schema] = None
    ) -> "Instance":
        from ._store import FactStore

        store = FactStore(schema.copy() if schema is not None else Schema())
        store.insert_atoms(atoms, canonicalize_variables=True)
        return store.snapshot()

    @classmethod
    def empty(cls, schema: Optional[Schema] = None) -> "Instance":
        return cls.from_atoms((), schema)

    # -- basic protocol ----------------------------------------------------

    def __len__(self) -> int:
        return self._len

    def __iter__(self) -> Iterator[Atom]:
        return self._store.iter_atoms(self._counts)

    def __contains__(self, a: Atom) -> bool:
        return self._store.contains_atom(a, self._counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        if self._len != other._len:
            return False
        return self.to_frozenset() == other.to_frozenset()

    __hash__ = None  # mutable-cache internals; compare via to_frozenset

    def __repr__(self) -> str:
        if self._len <= 8:
            inner = ", ".join(str(a) for a in self)
            return f"Instance({{{inner}}})"
        return f"Instance(<{self._len} atoms>)"

    # -- queries -----------------------------------------------------------

    def active_domain(self) -> frozenset[Term]:
        if self._adom is None:
            self._adom = frozenset(
                self._store.pool.term_of(int(k))
                for k in self._store.adom_keys(self._counts)
            )
        return self._adom

    def atoms_by_predicate(self, predicate: str) -> frozenset[Atom]:
        return frozenset(self._store.iter_atoms(self._counts, only=predicate))

    def predicates(self) -> tuple[str, ...]:
        return tuple(p for p, n in self._counts.items() if n > 0)

    def count(self, predicate: str) -> int:
        return self._counts.get(predicate, 0)

    def to_frozenset(self) -> frozenset[Atom]:
        if self._fs is None:
            self._fs = frozenset(self)
        return self._fs

    def schema(self) -> Schema:
        return self._store.schema.copy()

    # -- derived instances --------------------------------------------------

    def with_atoms(self, extra: Iterable[Atom]) -> "Instance":
        """The union of this instance with `extra` (nulls allowed)."""
        store = self._store.clone(self._counts)
        store.insert_atoms(extra, canonicalize_variables=False, intern_nulls=True)
        return store.snapshot()


def active_domain(instance: Instance) -> frozenset[Term]:
    """Exactly the terms occurring in some atom of the instance."""
    return instance.active_domain()


def atoms_by_predicate(instance: Instance, predicate: str) -> frozenset[Atom]:
    """All and only the atoms of the instance over `predicate`.

    Unknown predicates yield the empty set rather than an error.
    """
    return instance.atoms_by_predicate(predicate)


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """An existential rule: body -> exists(existentials) head.

    frontier = vars(body) ∩ vars(head); existentials = vars(head) \\ vars(body).
    Datalog iff existentials is empty. Body and head atoms are constant-free
    and null-free.
    """

    id: str
    body: tuple[Atom, ...]
    head: tuple[Atom, ...]
    frontier: frozenset[Variable] = field(default=frozenset())
    existentials: frozenset[Variable] = field(default=frozenset())

    @staticmethod
    def make(rule_id: str, body: Iterable[Atom], head: Iterable[Atom]) -> "Rule":
        body = tuple(body)
        head = tuple(head)
        body_vars = frozenset(v for a in body for v in a.variables())
        head_vars = frozenset(v for a in head for v in a.variables())
        rule = Rule(
            id=rule_id,
            body=body,
            head=head,
            frontier=body_vars & head_vars,
            existentials=head_vars - body_vars,
        )
        problem = validate_rule(rule)
        if problem is not None:
            raise RuleError(f"rule {rule_id}: {problem}")
        return rule

    @property
    def is_datalog(self) -> bool:
        return not self.existentials

    def body_variables(self) -> tuple[Variable, ...]:
        """Body variables in first-occurrence order."""
        seen: dict[Variable, None] = {}
        for a in self.body:
            for t in a.args:
                if isinstance(t, Variable) and t not in seen:
                    seen[t] = None
        return tuple(seen)

    def __str__(self) -> str:
        b = ", ".join(str(a) for a in self.body)
        h = ", ".join(str(a) for a in self.head)
        return f"[{self.id}] {b} -> {h} ."


def validate_rule(rule: Rule) -> Optional[str]:
    """Return None if the rule is well-formed, else the first violation."""
    if not rule.body:
        return "empty body"
    if not rule.head:
        return "empty head"
    for part, atoms in (("body", rule.body), ("head", rule.head)):
        for a in atoms:
            for t in a.args:
                if isinstance(t, Constant):
                    return f"constant {t.name} in {part} atom {a}"
                if isinstance(t, Null):
                    return f"null {render_term(t)} in {part} atom {a}"
    body_vars = frozenset(v for a in rule.body for v in a.variables())
    head_vars = frozenset(v for a in rule.head for v in a.variables())
    if rule.frontier != body_vars & head_vars:
        return "frontier is not vars(body) ∩ vars(head)"
    if rule.existentials != head_vars - body_vars:
        return "existentials are not vars(head) \\ vars(body)"
    return None


# ---------------------------------------------------------------------------
# Knowledge bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnowledgeBase:
    """A rule set paired with an input instance. Rule ids are unique."""

    rules: tuple[Rule, ...]
    instance: Instance

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        seen: set[str] = set()
        for r in self.rules:
            if r.id in seen:
                raise ModelError(f"duplicate rule id: {r.id}")
            seen.add(r.id)
        # One shared registry must accept every predicate of rules and data.
        schema = self.instance.schema()
        for r in self.rules:
            for a in r.body + r.head:
                schema.declare(a.predicate, len(a.args))

    def rule_by_id(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)
