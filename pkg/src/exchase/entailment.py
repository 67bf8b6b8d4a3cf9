"""Boolean conjunctive query entailment over chased instances.

Two procedures are offered. decide_bcq_class_c is the terminating decision
procedure for rule sets produced by the compiler: it chases with the
semi-oblivious variant to the fixed depth M = 2 * (number of query atoms) + 1
and evaluates the query on the result, which is complete for that rule
class. decide_bcq_bounded is the generic semi-decision fallback for
arbitrary rules: a positive match within the round bound is sound for every
variant, a negative answer is only conclusive when the chase terminated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .chase import run_chase
from .compiler import CompiledRuleSet
from .homomorphism import Binding, find_homomorphism
from .model import (
    Atom,
    Constant,
    Instance,
    KnowledgeBase,
    ModelError,
    Null,
    Rule,
)

__all__ = [
    "EntailmentVerdict",
    "chase_to_depth",
    "decide_bcq_class_c",
    "decide_bcq_bounded",
    "query_depth",
]

RuleSource = Union[CompiledRuleSet, Sequence[Rule]]


@dataclass(frozen=True)
class EntailmentVerdict:
    """Outcome of a BCQ check.

    answer is "entailed", "not_entailed" or "bound_reached"; witness is a
    homomorphism from the query into `chased`, the instance the query was
    evaluated on (kept so the witness stays checkable: nulls are only equal
    within the chase run that created them). downgraded marks a class-C
    request that ran with only the generic bounded semantics because the
    rules did not come from the compiler.
    """

    answer: str
    depth_used: int
    witness: Optional[Binding] = None
    downgraded: bool = False
    chased: Optional[Instance] = None

    def __post_init__(self) -> None:
        if self.answer not in ("entailed", "not_entailed", "bound_reached"):
            raise ModelError(f"unknown answer kind: {self.answer!r}")
        if self.answer == "entailed" and self.witness is None:
            raise ModelError("entailed verdicts must carry a witness")

    def __bool__(self) -> bool:
        return self.answer == "entailed"

    def __str__(self) -> str:
        tail = " (downgraded)" if self.downgraded else ""
        return f"{self.answer}@{self.depth_used}{tail}"


def _rules_of(rs: RuleSource) -> tuple[Rule, ...]:
    if isinstance(rs, CompiledRuleSet):
        return rs.rules
    return tuple(rs)


def chase_to_depth(
    instance: Instance, rules: RuleSource, variant: str, rounds: int
) -> Instance:
    """The instance after `rounds` chase rounds (round 0 is the Datalog
    closure); a fixpoint may be reached earlier."""
    kb = KnowledgeBase(rules=_rules_of(rules), instance=instance)
    return run_chase(kb, variant, max_rounds=rounds).result


def query_depth(query: Iterable[Atom]) -> int:
    """The chase depth that decides a query over compiled rules: twice the
    atom count plus one."""
    n = len(list(query))
    if n == 0:
        raise ModelError("query must contain at least one atom")
    return 2 * n + 1


def _check_query(query: Sequence[Atom]) -> None:
    if not query:
        raise ModelError("query must contain at least one atom")
    for a in query:
        for t in a.args:
            if isinstance(t, Null):
                raise ModelError(f"query atom {a} contains a null")


def decide_bcq_class_c(
    instance: Instance, rs: RuleSource, query: Iterable[Atom]
) -> EntailmentVerdict:
    """Decide instance, rules |= query for compiler-produced rule sets.

    Chases with the semi-oblivious variant to depth M = 2|q| + 1 and
    evaluates there; the verdict is final (never bound_reached). Constants
    in the query must map to themselves. If rs is not a compiled rule set
    the completeness guarantee is lost, so the call downgrades to
    decide_bcq_bounded at the same depth and flags the verdict.
    """
    query = list(query)
    _check_query(query)
    for t in instance.active_domain():
        if not isinstance(t, Constant):
            raise ModelError(f"instance must be constant-only, found {t}")
    depth = query_depth(query)
    if not isinstance(rs, CompiledRuleSet):
        kb = KnowledgeBase(rules=tuple(rs), instance=instance)
        inner = decide_bcq_bounded(kb, query, "so", depth)
        return EntailmentVerdict(
            answer=inner.answer,
            depth_used=inner.depth_used,
            witness=inner.witness,
            downgraded=True,
            chased=inner.chased,
        )
    chased = chase_to_depth(instance, rs, "so", depth)
    witness = find_homomorphism(query, chased, None)
    if witness is not None:
        return EntailmentVerdict("entailed", depth, witness, chased=chased)
    return EntailmentVerdict("not_entailed", depth, chased=chased)


def decide_bcq_bounded(
    kb: KnowledgeBase, query: Iterable[Atom], variant: str, max_rounds: int
) -> EntailmentVerdict:
    """Semi-decide kb |= query by chasing at most max_rounds rounds.

    entailed is sound under every variant. not_entailed is reported only
    when the chase reached a fixpoint within the bound; otherwise the
    verdict is bound_reached.
    """
    query = list(query)
    _check_query(query)
    out = run_chase(kb, variant, max_rounds=max_rounds)
    witness = find_homomorphism(query, out.result, None)
    depth = out.status.rounds
    if witness is not None:
        return EntailmentVerdict("entailed", depth, witness, chased=out.result)
    if out.status.is_terminated:
        return EntailmentVerdict("not_entailed", depth, chased=out.result)
    return EntailmentVerdict("bound_reached", depth, chased=out.result)
