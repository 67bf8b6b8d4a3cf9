import pytest

from exchase import (
    Constant,
    EntailmentVerdict,
    Instance,
    KnowledgeBase,
    ModelError,
    Null,
    Rule,
    Variable,
    apply_binding,
    atom,
    chase_to_depth,
    decide_bcq_bounded,
    decide_bcq_class_c,
    query_depth,
)

W = Constant("w")
X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")
X1, X2, X3, X4 = (Variable(f"X{i}") for i in range(1, 5))


def test_query_depth():
    assert query_depth([atom("S0", X, Y)]) == 3
    assert query_depth([atom("S0", X, Y), atom("End", Y)]) == 5
    with pytest.raises(ModelError):
        query_depth([])


def test_verdict_protocol():
    v = EntailmentVerdict(answer="not_entailed", depth_used=3)
    assert not v
    assert str(v) == "not_entailed@3"
    with pytest.raises(ModelError):
        EntailmentVerdict(answer="maybe", depth_used=1)
    with pytest.raises(ModelError):
        EntailmentVerdict(answer="entailed", depth_used=1)  # witness required


# -- class C decision -----------------------------------------------------------

def test_chain_query_entailed_with_checkable_witness(rs_m1, end_w):
    q = (atom("S0", X, Y),)
    v = decide_bcq_class_c(end_w, rs_m1, q)
    assert v.answer == "entailed"
    assert v.depth_used == 3
    assert bool(v)
    for img in apply_binding(q, v.witness):
        assert img in v.chased


def test_self_loop_query_not_entailed(rs_m1, end_w):
    v = decide_bcq_class_c(end_w, rs_m1, (atom("S0", X, X),))
    assert v.answer == "not_entailed"
    assert v.witness is None and not v


def test_constant_queries(rs_m1, end_w):
    v = decide_bcq_class_c(end_w, rs_m1, (atom("End", X),))
    assert v.answer == "entailed"
    assert v.witness == {X: W}
    absent = decide_bcq_class_c(end_w, rs_m1, (atom("End", Constant("zzz")),))
    assert absent.answer == "not_entailed"


def test_longer_query_uses_deeper_chase(rs_m1, end_w):
    q = (atom("S0", X1, X2), atom("S0", X2, X3))
    v = decide_bcq_class_c(end_w, rs_m1, q)
    assert v.depth_used == 5
    assert v.answer == "entailed"


def test_instance_must_be_constant_only(rs_m1):
    inst = Instance.from_atoms([atom("End", Variable("u"))])
    with pytest.raises(ModelError):
        decide_bcq_class_c(inst, rs_m1, (atom("End", X),))


def test_queries_validated(rs_m1, end_w):
    with pytest.raises(ModelError):
        decide_bcq_class_c(end_w, rs_m1, ())
    with pytest.raises(ModelError):
        decide_bcq_class_c(end_w, rs_m1, (atom("End", Null(0)),))


def test_plain_rule_list_downgrades(end_w):
    r = Rule.make("r", [atom("End", X)], [atom("S0", Y, X)])
    v = decide_bcq_class_c(end_w, (r,), (atom("S0", Y, X),))
    assert v.downgraded
    assert v.answer == "entailed"
    assert "downgraded" in str(v)


def test_compiled_ruleset_is_not_downgraded(rs_m1, end_w):
    v = decide_bcq_class_c(end_w, rs_m1, (atom("End", X),))
    assert not v.downgraded


# -- bounded decision -------------------------------------------------------------

def toy_kb():
    r = Rule.make("r", [atom("Q", X)], [atom("E", X, Z), atom("Q", Z)])
    return KnowledgeBase(
        rules=(r,), instance=Instance.from_atoms([atom("Q", Constant("a"))])
    )


def test_bounded_entailed():
    q = (atom("E", X, Y), atom("E", Y, Z))
    v = decide_bcq_bounded(toy_kb(), q, "so", 4)
    assert v.answer == "entailed"
    for img in apply_binding(q, v.witness):
        assert img in v.chased


def test_bounded_not_entailed_needs_termination():
    r = Rule.make("r", [atom("Q", X)], [atom("E", X, Z)])
    kb = KnowledgeBase(
        rules=(r,), instance=Instance.from_atoms([atom("Q", Constant("a"))])
    )
    v = decide_bcq_bounded(kb, (atom("E", X, X),), "so", 5)
    assert v.answer == "not_entailed"
    assert v.depth_used == 1


def test_bounded_inconclusive_reports_bound():
    # a three-link chain needs three rounds; two are allowed
    q = (atom("E", X1, X2), atom("E", X2, X3), atom("E", X3, X4))
    v = decide_bcq_bounded(toy_kb(), q, "so", 2)
    assert v.answer == "bound_reached"
    assert v.depth_used == 2
    assert v.witness is None


def test_bounded_rejects_bad_variant():
    with pytest.raises(ModelError):
        decide_bcq_bounded(toy_kb(), (atom("Q", X),), "zz", 2)


# -- chase_to_depth ----------------------------------------------------------------

def test_chase_to_depth_returns_instance(rs_m1, end_w):
    inst = chase_to_depth(end_w, rs_m1.rules, "so", 1)
    assert atom("End", W) in inst
    assert inst.count("S0") == 1
    deeper = chase_to_depth(end_w, rs_m1.rules, "so", 2)
    assert deeper.count("S0") == 2
