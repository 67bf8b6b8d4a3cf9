import pytest

from exchase import (
    ChainDecomposition,
    Constant,
    Instance,
    KnowledgeBase,
    ModelError,
    Ratio,
    StructureReport,
    atom,
    chain_decomposition,
    clique_witness,
    compare_critical,
    end_instance,
    flood_report,
    run_chase,
    ruleset_from_ratios,
    verify_arithmetic,
)

W = Constant("w")
A, B = Constant("a"), Constant("b")


@pytest.fixture(scope="module")
def rs6():
    return ruleset_from_ratios(
        6, [Ratio(3, 2) if i % 2 == 0 else Ratio(2, 1) for i in range(6)]
    )


@pytest.fixture(scope="module")
def p6_depth7(rs6):
    kb = KnowledgeBase(rules=rs6.rules, instance=end_instance())
    out = run_chase(kb, "so", 7)
    assert str(out.status) == "bound_reached(7)"
    return out.result


# -- StructureReport invariants ---------------------------------------------------

def test_report_requires_counterexample_on_failure():
    ok = StructureReport(name="x", passed=True)
    assert "pass" in str(ok)
    with pytest.raises(ModelError):
        StructureReport(name="x", passed=False)
    bad = StructureReport(name="x", passed=False, counterexample=(atom("P", A),),
                          detail="why")
    assert "FAIL" in str(bad) and "why" in str(bad)


# -- chain decomposition ------------------------------------------------------------

def test_single_chain_shape(p6_depth7):
    dec = chain_decomposition(end_instance(), p6_depth7)
    assert isinstance(dec, ChainDecomposition)
    assert dec.anchors == (W,)
    assert dec.length(W) == 7
    chain = dec.chain(W)
    assert chain[0] == W and len(chain) == 8
    assert len(set(chain)) == 8
    # every link S0(child, parent) is present, and these are all the S0 atoms
    links = {atom("S0", chain[i + 1], chain[i]) for i in range(7)}
    assert p6_depth7.atoms_by_predicate("S0") == frozenset(links)


def test_closed_instance_has_empty_chains(p6_depth7):
    dec = chain_decomposition(p6_depth7, p6_depth7)
    assert isinstance(dec, ChainDecomposition)
    assert all(dec.length(a) == 0 for a in dec.anchors)


def test_two_anchors_get_disjoint_chains(rs6):
    two = Instance.from_atoms(
        [atom("End", W), atom("End", Constant("v"))], schema=rs6.predicates.copy()
    )
    out = run_chase(KnowledgeBase(rules=rs6.rules, instance=two), "so", 2)
    dec = chain_decomposition(two, out.result)
    assert isinstance(dec, ChainDecomposition)
    assert [dec.length(a) for a in dec.anchors] == [2, 2]
    seen = set()
    for a in dec.anchors:
        tail = dec.chain(a)[1:]
        assert not (seen & set(tail))
        seen |= set(tail)


def test_unknown_anchor_rejected(p6_depth7):
    dec = chain_decomposition(end_instance(), p6_depth7)
    with pytest.raises(KeyError):
        dec.chain(Constant("nope"))


def test_stray_s0_source_fails_decomposition(p6_depth7):
    broken = p6_depth7.with_atoms([atom("S0", W, W)])
    rep = chain_decomposition(end_instance(), broken)
    assert isinstance(rep, StructureReport)
    assert not rep.passed
    assert rep.counterexample


def test_extra_s_atom_fails_decomposition(p6_depth7):
    # S-characterization is exact, so an unexplained S atom is flagged
    fresh = sorted(
        p6_depth7.active_domain() - {W}, key=lambda t: t.id  # type: ignore[attr-defined]
    )
    broken = p6_depth7.with_atoms([atom("S", fresh[0], fresh[-1])])
    rep = chain_decomposition(end_instance(), broken)
    assert isinstance(rep, StructureReport)
    assert not rep.passed
    assert any(a.predicate == "S" for a in rep.counterexample)


# -- flooding ------------------------------------------------------------------------

def test_flood_covers_all_but_youngest(p6_depth7):
    rep = flood_report(end_instance(), p6_depth7)
    assert rep.passed
    dec = chain_decomposition(end_instance(), p6_depth7)
    chain = dec.chain(W)
    flooded = {a.args[0] for a in p6_depth7.atoms_by_predicate("Flood")}
    assert flooded == set(chain[:-1])
    assert chain[-1] not in flooded


def test_flooding_the_youngest_is_flagged(p6_depth7):
    dec = chain_decomposition(end_instance(), p6_depth7)
    youngest = dec.chain(W)[-1]
    rep = flood_report(end_instance(), p6_depth7.with_atoms([atom("Flood", youngest)]))
    assert not rep.passed
    assert atom("Flood", youngest) in rep.counterexample


def test_given_flood_facts_are_preserved(rs6):
    start = Instance.from_atoms(
        [atom("End", W), atom("Flood", A)], schema=rs6.predicates.copy()
    )
    out = run_chase(KnowledgeBase(rules=rs6.rules, instance=start), "so", 2)
    assert flood_report(start, out.result).passed


# -- arithmetic ----------------------------------------------------------------------

def test_verify_arithmetic_on_growing_table(rs6, p6_depth7):
    dec = chain_decomposition(end_instance(), p6_depth7)
    rep = verify_arithmetic(p6_depth7, rs6, dec.chain(W)[-1])
    assert rep.passed
    assert "chain length 7" in rep.detail


def test_verify_arithmetic_flags_tampering(rs6, p6_depth7):
    dec = chain_decomposition(end_instance(), p6_depth7)
    chain = dec.chain(W)
    t0 = chain[-1]
    # a residue atom at the wrong chain position breaks strictness
    broken = p6_depth7.with_atoms([atom("R_3", t0, chain[5])])
    rep = verify_arithmetic(broken, rs6, t0)
    assert not rep.passed
    assert rep.counterexample


def test_stalled_ratio_table_terminates_and_verifies():
    # 3/2 everywhere: the walk from 2 stalls at 3 (odd), the chain stops
    rs1 = ruleset_from_ratios(1, [Ratio(3, 2)])
    out = run_chase(KnowledgeBase(rules=rs1.rules, instance=end_instance()), "so", 20)
    assert str(out.status) == "terminated(4)"
    assert len(out.result) == 120
    dec = chain_decomposition(end_instance(), out.result)
    rep = verify_arithmetic(out.result, rs1, dec.chain(W)[-1])
    assert rep.passed


# -- cliques -------------------------------------------------------------------------

def test_clique_witness_on_flooded_chain(p6_depth7):
    assert clique_witness(p6_depth7, "R_0", 6)
    assert clique_witness(p6_depth7, "R_0", 7)
    assert not clique_witness(p6_depth7, "R_0", 8)


def test_clique_witness_small_cases():
    assert clique_witness(Instance.from_atoms([atom("P", A, A)]), "P", 1)
    pab = Instance.from_atoms([atom("P", A, B)])
    assert not clique_witness(pab, "P", 1)  # no self-loop anywhere
    assert not clique_witness(pab, "P", 2)
    with pytest.raises(ModelError):
        clique_witness(pab, "P", 0)


def test_clique_needs_both_directions():
    inst = Instance.from_atoms(
        [atom("P", A, A), atom("P", B, B), atom("P", A, B), atom("Flood", A),
         atom("Flood", B)]
    )
    assert not clique_witness(inst, "P", 2)  # missing P(b, a)
    assert clique_witness(inst.with_atoms([atom("P", B, A)]), "P", 2)


# -- critical instance comparison ------------------------------------------------------

def test_compare_critical_small_table():
    rs1 = ruleset_from_ratios(1, [Ratio(1, 1)])
    for n, size in ((0, 7), (1, 14)):
        rep = compare_critical(rs1, n)
        assert rep.passed
        assert f"{size} atoms each side" in rep.detail
    with pytest.raises(ModelError):
        compare_critical(rs1, -1)
