"""Structural checks on chase outputs of compiled rule sets.

Chases of constant-only instances under these rules grow in a rigid way:
every fresh term sits on a chain anchored at an original domain element,
linked by S0-atoms, and the S, Flood, R_i, T_i and G predicates over a chain
are fully determined by modular arithmetic on chain indexes. Each function
here recomputes the expected shape with plain arithmetic (no chase
machinery) and compares it with what the engine actually produced, so a
passing report certifies the engine and compiler against an independent
oracle, and a failing one pinpoints the first offending atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

import networkx as nx

from .chase import run_chase
from .compiler import W, CompiledRuleSet, critical_instance, end_instance
from .homomorphism import find_homomorphism
from .minsky import Ratio
from .model import (
    Atom,
    Instance,
    KnowledgeBase,
    ModelError,
    Term,
    atom,
    render_term,
    term_sort_key,
)

__all__ = [
    "ChainDecomposition",
    "StructureReport",
    "chain_decomposition",
    "verify_arithmetic",
    "flood_report",
    "clique_witness",
    "compare_critical",
]


@dataclass(frozen=True)
class StructureReport:
    """Outcome of one structural check; counterexample atoms explain a fail."""

    name: str
    passed: bool
    counterexample: tuple[Atom, ...] = ()
    detail: str = ""

    def __post_init__(self) -> None:
        if not self.passed and not self.counterexample:
            raise ModelError("failing reports must carry counterexample atoms")

    def __str__(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        tail = f" ({self.detail})" if self.detail else ""
        return f"{self.name}: {mark}{tail}"


@dataclass(frozen=True)
class ChainDecomposition:
    """Per-anchor chains of fresh terms.

    chains maps each original domain element a to the ordered fresh terms
    a_1..a_m introduced above it; the anchor itself is index 0 and is not
    listed. Anchors that never grew map to the empty tuple.
    """

    chains: Mapping[Term, tuple[Term, ...]] = field(default_factory=dict)

    def length(self, anchor: Term) -> int:
        return len(self.chains[anchor])

    def chain(self, anchor: Term) -> tuple[Term, ...]:
        """The full chain a_0..a_m, anchor included."""
        return (anchor,) + self.chains[anchor]

    @property
    def anchors(self) -> tuple[Term, ...]:
        return tuple(self.chains)


def _fail(name: str, atoms: Iterable[Atom], detail: str) -> StructureReport:
    ce = tuple(sorted(atoms, key=str)[:5])
    return StructureReport(name, False, ce, detail)


def chain_decomposition(
    initial: Instance, chased: Instance
) -> Union[ChainDecomposition, StructureReport]:
    """Partition the fresh terms of a chase output into per-anchor chains.

    Validates the exact shape such chases must have: every fresh term a_i
    hangs off an anchor a through the S0-atoms S0(a_{i+1}, a_i), and the
    S-atoms are exactly the initial ones, the S0-images, the End self-loops
    and the chain links. Any deviation yields a failing report instead.
    """
    name = "chain"
    anchors = sorted(initial.active_domain(), key=term_sort_key)
    anchor_set = set(anchors)
    fresh = set(chased.active_domain()) - anchor_set

    s0_initial = initial.atoms_by_predicate("S0")
    new_s0 = chased.atoms_by_predicate("S0") - s0_initial
    child: dict[Term, Term] = {}
    for a in new_s0:
        u, v = a.args
        if u in anchor_set or u not in fresh:
            return _fail(
                name, [a], f"new S0-atom source {render_term(u)} is not fresh"
            )
        if v in child:
            return _fail(
                name,
                [a, atom("S0", child[v], v)],
                f"{render_term(v)} has two chain children",
            )
        child[v] = u
    chains: dict[Term, tuple[Term, ...]] = {}
    used: set[Term] = set()
    for a in anchors:
        run: list[Term] = []
        cur = a
        while cur in child:
            cur = child[cur]
            if cur in used or cur in run:
                return _fail(name, [atom("S0", cur, run[-1] if run else a)],
                             f"chain term {render_term(cur)} reused")
            run.append(cur)
        used.update(run)
        chains[a] = tuple(run)
    stray = fresh - used
    if stray:
        witness = [x for x in chased if set(x.args) & stray]
        return _fail(name, witness, f"{len(stray)} fresh terms on no chain")
    orphan_links = len(new_s0) - sum(len(c) for c in chains.values())
    if orphan_links:
        return _fail(name, new_s0, f"{orphan_links} S0-links outside all chains")

    expected_s = {atom("S", *a.args) for a in initial.atoms_by_predicate("S")}
    expected_s |= {atom("S", *a.args) for a in s0_initial}
    expected_s |= {
        atom("S", a.args[0], a.args[0]) for a in initial.atoms_by_predicate("End")
    }
    expected_s |= {atom("S", *a.args) for a in new_s0}
    actual_s = set(chased.atoms_by_predicate("S"))
    if actual_s != expected_s:
        diff = (actual_s - expected_s) | (expected_s - actual_s)
        return _fail(name, diff, "S-atoms deviate from the chain shape")
    return ChainDecomposition(chains)


def flood_report(initial: Instance, chased: Instance) -> StructureReport:
    """Check that Flood holds exactly where the chain shape dictates:
    initial Flood and End anchors, targets of initial S/S0 atoms, and every
    chain term strictly below the youngest."""
    name = "flood"
    decomp = chain_decomposition(initial, chased)
    if isinstance(decomp, StructureReport):
        return StructureReport(name, False, decomp.counterexample, decomp.detail)
    expected: set[Term] = set()
    for a in initial.atoms_by_predicate("Flood"):
        expected.add(a.args[0])
    for a in initial.atoms_by_predicate("End"):
        expected.add(a.args[0])
    for pred in ("S", "S0"):
        for a in initial.atoms_by_predicate(pred):
            expected.add(a.args[1])
    for anchor in decomp.anchors:
        full = decomp.chain(anchor)
        expected.update(full[:-1])  # all but the youngest
    actual = {a.args[0] for a in chased.atoms_by_predicate("Flood")}
    if actual != expected:
        diff = {atom("Flood", t) for t in actual ^ expected}
        return _fail(name, diff, "Flood-atoms deviate from the chain shape")
    return StructureReport(name, True, detail=f"{len(actual)} flooded terms")


def _chain_from_youngest(chased: Instance, youngest: Term) -> list[Term]:
    """The chain t_0..t_n read off the S0-atoms, youngest first; t_n is the
    anchor. Raises if youngest is not the top of a simple S0-chain."""
    succ: dict[Term, Term] = {}
    for a in chased.atoms_by_predicate("S0"):
        u, v = a.args
        if u in succ:
            raise ModelError(f"{render_term(u)} has two S0-successors")
        succ[u] = v
    if youngest not in succ and youngest not in chased.active_domain():
        raise ModelError(f"{render_term(youngest)} does not occur in the instance")
    for a in chased.atoms_by_predicate("S0"):
        if a.args[1] == youngest:
            raise ModelError(
                f"{render_term(youngest)} is not the youngest chain term"
            )
    chain = [youngest]
    seen = {youngest}
    while chain[-1] in succ:
        nxt = succ[chain[-1]]
        if nxt in seen:
            raise ModelError("S0-atoms form a cycle")
        chain.append(nxt)
        seen.add(nxt)
    return chain


def _orbit_indexes(ratios: tuple[Ratio, ...], p: int, limit: int) -> tuple[list[int], bool]:
    """Chain indexes visited from 2 under v -> v * ratio(v mod p), stopping at
    a repeat (bounded) or past `limit` or a non-integral step (both open)."""
    values = [2]
    seen = {2}
    while True:
        v = values[-1]
        r = ratios[v % p]
        if (v * r.num) % r.den != 0:
            return values, True
        nxt = v * r.num // r.den
        if nxt in seen:
            return values, True
        if nxt > limit:
            values.append(nxt)
            return values, False
        values.append(nxt)
        seen.add(nxt)


def verify_arithmetic(
    chased: Instance, rs: CompiledRuleSet, youngest: Term
) -> StructureReport:
    """Compare the R/T/G atoms rooted at the youngest chain term against the
    modular arithmetic they are meant to compute.

    With the chain t_0..t_n (t_0 = youngest, t_n the anchor, indexes past n
    clamped to the anchor), checks exactly:
      residues      R_i(t_0, .) holds at t_k iff k = i mod p, plus the anchor;
      products      T_i(t_0, ., .) pairs are (t_{m*den}, t_{m*num}) for m >= 0;
      orbit         G(t_0, t_v) holds for every v along the ratio orbit of 2;
      orbit-exact   if that orbit stays strictly inside the chain, G(t_0, .)
                    holds nowhere else (skipped otherwise).
    """
    name = "arithmetic"
    p, ratios = rs.p, rs.ratios
    chain = _chain_from_youngest(chased, youngest)
    n = len(chain) - 1
    anchor = chain[-1]

    def tt(k: int) -> Term:
        return chain[k] if k < n else anchor

    t0 = chain[0]
    for i in range(p):
        expected = {tt(k) for k in range(n) if k % p == i}
        expected.add(anchor)
        actual = {a.args[1] for a in chased.atoms_by_predicate(f"R_{i}")
                  if a.args[0] == t0}
        if actual != expected:
            diff = {atom(f"R_{i}", t0, u) for u in actual ^ expected}
            return _fail(name, diff, f"residue class {i} wrong at the chain top")

    for i in range(p):
        r = ratios[i]
        expected_pairs: set[tuple[Term, Term]] = set()
        m = 0
        while True:
            pair = (tt(m * r.den), tt(m * r.num))
            expected_pairs.add(pair)
            if pair == (anchor, anchor):
                break
            m += 1
        actual_pairs = {(a.args[1], a.args[2])
                        for a in chased.atoms_by_predicate(f"T_{i}")
                        if a.args[0] == t0}
        if actual_pairs != expected_pairs:
            diff = {atom(f"T_{i}", t0, u, v)
                    for (u, v) in actual_pairs ^ expected_pairs}
            return _fail(name, diff, f"multiplication pairs wrong for ratio {r}")

    orbit, bounded = _orbit_indexes(ratios, p, n)
    for v in orbit:
        if atom("G", t0, tt(v)) not in chased:
            return _fail(name, [atom("G", t0, tt(v))],
                         f"orbit value {v} missing from G")
    checked_exact = bounded and max(orbit) <= n - 1
    if checked_exact:
        expected_g = {tt(v) for v in orbit}
        actual_g = {a.args[1] for a in chased.atoms_by_predicate("G")
                    if a.args[0] == t0}
        if actual_g != expected_g:
            diff = {atom("G", t0, u) for u in actual_g ^ expected_g}
            return _fail(name, diff, "G-atoms at the chain top exceed the orbit")
    detail = f"chain length {n}, orbit {'exact' if checked_exact else 'prefix'}"
    return StructureReport(name, True, detail=detail)


def clique_witness(chased: Instance, predicate: str, k: int) -> bool:
    """True iff k distinct terms are fully interconnected by `predicate`,
    self-loops included (so k = 1 means a reflexive atom exists).

    Flooded terms are tried first: the flood generator makes them pairwise
    connected, so chase outputs usually answer from that set alone. The
    general search over the self-loop subgraph is exact either way.
    """
    if k < 1:
        raise ModelError(f"clique size must be >= 1, got {k}")
    edges = {(a.args[0], a.args[1]) for a in chased.atoms_by_predicate(predicate)
             if len(a.args) == 2}
    loops = {u for (u, v) in edges if u == v}
    if not loops:
        return False
    if k == 1:
        return True

    def all_connected(nodes: list[Term]) -> bool:
        return all(
            (u, v) in edges and (v, u) in edges
            for i, u in enumerate(nodes) for v in nodes[i + 1:]
        )

    flooded = sorted(
        {a.args[0] for a in chased.atoms_by_predicate("Flood")} & loops,
        key=term_sort_key,
    )
    if len(flooded) >= k and all_connected(flooded[:k]):
        return True
    graph = nx.Graph()
    graph.add_nodes_from(loops)
    graph.add_edges_from(
        (u, v) for (u, v) in edges
        if u != v and u in loops and v in loops and (v, u) in edges
    )
    for clique in nx.find_cliques(graph):
        if len(clique) >= k:
            return True
    return False


def compare_critical(rs: CompiledRuleSet, rounds: int) -> StructureReport:
    """Chase the all-facts single-constant instance and {End(w)} for the same
    number of oblivious rounds and check the former is the latter plus
    S0(w,w), up to renaming of nulls (equal sizes and homomorphisms both
    ways; anchors are constants so they stay fixed)."""
    name = "critical"
    crit = run_chase(
        KnowledgeBase(rules=rs.rules, instance=critical_instance(rs)),
        "o", max_rounds=rounds,
    ).result
    step = run_chase(
        KnowledgeBase(rules=rs.rules, instance=end_instance()),
        "o", max_rounds=rounds,
    ).result
    union = step.with_atoms([atom("S0", W, W)])
    if len(crit) != len(union):
        counts = {}
        for pred in set(crit.predicates()) | set(union.predicates()):
            a, b = crit.count(pred), union.count(pred)
            if a != b:
                counts[pred] = (a, b)
        sample_pred = sorted(counts)[0]
        side = crit if counts[sample_pred][0] > counts[sample_pred][1] else union
        return _fail(
            name,
            list(side.atoms_by_predicate(sample_pred)),
            f"sizes differ: {len(crit)} vs {len(union)}; first mismatch {counts[sample_pred]} at {sample_pred}",
        )
    fwd = find_homomorphism(list(crit), union, None)
    if fwd is None:
        return _fail(name, sorted(crit.atoms_by_predicate("S0"), key=str),
                     "no retraction from the critical chase into step + S0(w,w)")
    bwd = find_homomorphism(list(union), crit, None)
    if bwd is None:
        return _fail(name, sorted(union.atoms_by_predicate("S0"), key=str),
                     "no retraction from step + S0(w,w) into the critical chase")
    return StructureReport(name, True, detail=f"{len(crit)} atoms each side")
