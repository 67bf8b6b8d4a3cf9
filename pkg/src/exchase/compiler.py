"""Compile a three-counter machine into its simulating rule set.

The emitted schema is S0/2, S/2, End/1, Flood/1, G/2 plus residue families
R_0..R_{p-1}/2 and T_0..T_{p-1}/3, where p is the product of the machine's
prime basis. The rule set has 3p + 6 rules and exactly one rule with an
existential variable (R_exists). The T-family advances its two chain
positions by the denominator and numerator of the per-residue ratio, with
S^n spelled out as an S-path through n-1 fresh body variables.

All rules are constant-free; chain terms only enter through chasing an
instance such as end_instance() = {End(w)} or the critical instance (every
predicate filled with the single constant w).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .minsky import PrimeBasis, Ratio, ThreeCM, ratio_for_residue
from .model import (
    Atom,
    Constant,
    Instance,
    ModelError,
    Rule,
    Schema,
    Variable,
    atom,
)

__all__ = [
    "CompiledRuleSet",
    "compile_machine",
    "compile",
    "ruleset_from_ratios",
    "recognize_compiled",
    "critical_instance",
    "end_instance",
    "W",
]

# The anchor constant of end and critical instances.
W = Constant("w")

_X, _Y, _Z = Variable("X"), Variable("Y"), Variable("Z")


@dataclass(frozen=True)
class CompiledRuleSet:
    """Rules plus the arithmetic they encode.

    ratios[i] is the factor applied to chain positions at residue i: the
    R_T_i rule advances its middle position by ratios[i].den and its last
    position by ratios[i].num. basis is None for rule sets built from a raw
    ratio table.
    """

    rules: tuple[Rule, ...]
    basis: Optional[PrimeBasis]
    p: int
    predicates: Schema
    ratios: tuple[Ratio, ...]

    def __post_init__(self) -> None:
        if len(self.rules) != 3 * self.p + 6:
            raise ModelError(
                f"expected {3 * self.p + 6} rules for p={self.p}, "
                f"got {len(self.rules)}"
            )

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    @property
    def existential_rule(self) -> Rule:
        return self.rule("R_exists")

    @property
    def datalog_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.is_datalog)

    @property
    def non_datalog_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if not r.is_datalog)


def _s_path(body: list[Atom], start: Variable, prefix: str, n: int) -> Variable:
    """Append an S-path of length n >= 1 from `start`; returns the endpoint."""
    if n < 1:
        raise ModelError(f"S-path length must be >= 1, got {n}")
    cur = start
    for k in range(1, n):
        nxt = Variable(f"{prefix}{k}")
        body.append(atom("S", cur, nxt))
        cur = nxt
    end = Variable(f"{prefix}P")
    body.append(atom("S", cur, end))
    return end


def _build_rules(p: int, ratios: Sequence[Ratio]) -> tuple[Rule, ...]:
    rules: list[Rule] = []
    rules.append(Rule.make("R_S", [atom("S0", _X, _Y)], [atom("S", _X, _Y)]))
    for i in range(p):
        rules.append(
            Rule.make(
                f"R_R_{i}",
                [atom(f"R_{i}", _X, _Y), atom("S", _Y, _Z)],
                [atom(f"R_{(i + 1) % p}", _X, _Z)],
            )
        )
    for i in range(p):
        body = [atom(f"T_{i}", _X, _Y, _Z)]
        y_end = _s_path(body, _Y, "U", ratios[i].den)
        z_end = _s_path(body, _Z, "V", ratios[i].num)
        rules.append(
            Rule.make(f"R_T_{i}", body, [atom(f"T_{i}", _X, y_end, z_end)])
        )
    rules.append(Rule.make("R_flood_prop", [atom("S", _X, _Y)], [atom("Flood", _Y)]))
    rules.append(Rule.make("R_S_End", [atom("End", _X)], [atom("S", _X, _X)]))
    mid = Variable("U1")
    rules.append(
        Rule.make(
            "R_G_init",
            [atom("S", _X, mid), atom("S", mid, _Y)],
            [atom("G", _X, _Y)],
        )
    )
    for i in range(p):
        rules.append(
            Rule.make(
                f"R_G_step_{i}",
                [atom("G", _X, _Y), atom(f"R_{i}", _X, _Y), atom(f"T_{i}", _X, _Y, _Z)],
                [atom("G", _X, _Z)],
            )
        )
    gen_head = [atom("G", _X, _Y)]
    for j in range(p):
        gen_head.append(atom(f"R_{j}", _X, _Y))
        gen_head.append(atom(f"T_{j}", _X, _Y, _Z))
    rules.append(
        Rule.make(
            "R_flood_gen",
            [atom("Flood", _X), atom("Flood", _Y), atom("Flood", _Z)],
            gen_head,
        )
    )
    ex_head = [atom("S0", _X, _Y), atom("R_0", _X, _X)]
    for j in range(p):
        ex_head.append(atom(f"T_{j}", _X, _X, _X))
    rules.append(
        Rule.make("R_exists", [atom("G", _Y, _Z), atom("End", _Z)], ex_head)
    )
    return tuple(rules)


def _schema_for(p: int) -> Schema:
    schema = Schema()
    schema.declare("S0", 2)
    schema.declare("S", 2)
    schema.declare("End", 1)
    schema.declare("Flood", 1)
    schema.declare("G", 2)
    for i in range(p):
        schema.declare(f"R_{i}", 2)
    for i in range(p):
        schema.declare(f"T_{i}", 3)
    return schema


def compile_machine(machine: ThreeCM) -> CompiledRuleSet:
    """The full rule set simulating `machine`: 3p + 6 rules over the residue
    basis p = product of the machine's first m+3 primes."""
    basis = PrimeBasis.for_machine(machine)
    ratios = tuple(ratio_for_residue(machine, i) for i in range(basis.p))
    return CompiledRuleSet(
        rules=_build_rules(basis.p, ratios),
        basis=basis,
        p=basis.p,
        predicates=_schema_for(basis.p),
        ratios=ratios,
    )


# The operation is called "compile" at the API level; the module-level alias
# keeps that name available without shadowing the builtin inside this file.
compile = compile_machine


def ruleset_from_ratios(p: int, ratios: Sequence[Ratio]) -> CompiledRuleSet:
    """The same rule shape over an explicit ratio table.

    Lets tests and experiments drive the T/R/G machinery with ratios no
    machine encoding produces (machine-compiled numerators always carry the
    time prime, so e.g. 3/2 is impossible there).
    """
    ratios = tuple(ratios)
    if p < 1 or len(ratios) != p:
        raise ModelError(f"need exactly p={p} ratios, got {len(ratios)}")
    return CompiledRuleSet(
        rules=_build_rules(p, ratios),
        basis=None,
        p=p,
        predicates=_schema_for(p),
        ratios=ratios,
    )


def recognize_compiled(rules: Sequence[Rule]) -> Optional[CompiledRuleSet]:
    """Rebuild a CompiledRuleSet from rules equal to some compiled set.

    Intended for rules parsed back from a rendered file: the rule count
    fixes p, the S-path lengths of each R_T_i fix its ratio, and the result
    counts only if rebuilding from those ratios reproduces every rule
    verbatim. Returns None otherwise. The prime basis is not recoverable
    from text, so the result carries basis=None.
    """
    rules = tuple(rules)
    if len(rules) < 9 or (len(rules) - 6) % 3 != 0:
        return None
    p = (len(rules) - 6) // 3
    by_id = {r.id: r for r in rules}
    if len(by_id) != len(rules):
        return None
    ratios = []
    for i in range(p):
        r = by_id.get(f"R_T_{i}")
        if r is None or not r.body or len(r.body[0].args) != 3:
            return None
        succ = {}
        for a in r.body[1:]:
            if a.predicate != "S" or len(a.args) != 2 or a.args[0] in succ:
                return None
            succ[a.args[0]] = a.args[1]
        den = num = 0
        cur = r.body[0].args[1]
        while cur in succ:
            cur = succ.pop(cur)
            den += 1
        cur = r.body[0].args[2]
        while cur in succ:
            cur = succ.pop(cur)
            num += 1
        if succ or den < 1 or num < 1:
            return None
        try:
            ratios.append(Ratio(num, den))
        except ModelError:
            return None
    candidate = ruleset_from_ratios(p, ratios)
    for built in candidate.rules:
        if by_id.get(built.id) != built:
            return None
    return candidate


def critical_instance(rs: CompiledRuleSet) -> Instance:
    """Every schema predicate filled with the single constant w: 5 + 2p facts."""
    atoms = [
        Atom(pred, (W,) * arity) for pred, arity in rs.predicates.items()
    ]
    return Instance.from_atoms(atoms, schema=rs.predicates.copy())


def end_instance() -> Instance:
    """The anchor instance {End(w)}."""
    return Instance.from_atoms([atom("End", W)])
