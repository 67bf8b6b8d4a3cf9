import itertools

import pytest
from hypothesis import given, settings, strategies as st

from exchase import (
    Constant,
    Instance,
    ModelError,
    Null,
    Variable,
    apply_binding,
    atom,
    enumerate_homomorphisms,
    evaluate_bcq,
    exists_retraction,
    find_homomorphism,
)

A, B, C = Constant("a"), Constant("b"), Constant("c")
X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")


def assert_is_hom(src, dst, binding):
    for img in apply_binding(src, binding):
        assert img in dst, f"{img} missing from target"


# -- find_homomorphism -------------------------------------------------------

def test_variable_mapping_found_and_applies():
    dst = Instance.from_atoms([atom("E", A, B), atom("E", B, C)])
    h = find_homomorphism([atom("E", X, Y), atom("E", Y, Z)], dst)
    assert h is not None
    assert h[X] == A and h[Y] == B and h[Z] == C
    assert_is_hom([atom("E", X, Y), atom("E", Y, Z)], dst, h)


def test_constants_map_to_themselves():
    dst = Instance.from_atoms([atom("E", A, B)])
    assert find_homomorphism([atom("E", A, X)], dst) == {X: B}
    assert find_homomorphism([atom("E", B, X)], dst) is None


def test_absent_constant_or_predicate_is_a_clean_miss():
    dst = Instance.from_atoms([atom("E", A, B)])
    assert find_homomorphism([atom("E", X, Constant("zzz"))], dst) is None
    assert find_homomorphism([atom("F", X)], dst) is None


def test_variables_may_collapse_to_one_image():
    dst = Instance.from_atoms([atom("E", A, A)])
    h = find_homomorphism([atom("E", X, Y)], dst)
    assert h == {X: A, Y: A}


def test_repeated_variable_forces_equal_columns():
    dst = Instance.from_atoms([atom("E", A, B), atom("E", C, C)])
    assert find_homomorphism([atom("E", X, X)], dst) == {X: C}


def test_fixed_mapping_is_respected():
    dst = Instance.from_atoms([atom("E", A, B), atom("E", B, C)])
    h = find_homomorphism([atom("E", X, Y)], dst, fixed={X: B})
    assert h == {X: B, Y: C}
    assert find_homomorphism([atom("E", X, Y)], dst, fixed={X: C}) is None


def test_nulls_in_source_are_mappable():
    n = Null(0)
    dst = Instance.from_atoms([atom("E", A, B)])
    h = find_homomorphism([atom("E", n, B)], dst)
    assert h == {n: A}


def test_empty_source_maps_trivially():
    dst = Instance.from_atoms([atom("E", A, B)])
    assert find_homomorphism([], dst) == {}
    assert evaluate_bcq([], dst) is True


def test_deterministic_image_choice():
    # stable across repeated calls on the same instance
    dst = Instance.from_atoms([atom("P", B), atom("P", A), atom("P", C)])
    first = find_homomorphism([atom("P", X)], dst)
    assert first is not None
    assert all(find_homomorphism([atom("P", X)], dst) == first for _ in range(5))


# -- evaluate_bcq ------------------------------------------------------------

def test_evaluate_bcq_basics():
    dst = Instance.from_atoms([atom("E", A, B), atom("E", B, A)])
    assert evaluate_bcq([atom("E", X, Y), atom("E", Y, X)], dst)
    assert not evaluate_bcq([atom("E", X, X)], dst)


def test_evaluate_bcq_rejects_nulls_in_query():
    dst = Instance.from_atoms([atom("E", A, B)])
    with pytest.raises(ModelError):
        evaluate_bcq([atom("E", Null(0), X)], dst)


# -- exists_retraction -------------------------------------------------------

def test_retraction_fixes_shared_terms():
    n1, n2 = Null(101), Null(102)
    big = Instance.from_atoms([atom("E", A, n1), atom("E", A, n2), atom("P", n2)])
    small = Instance.from_atoms([atom("E", A, n1)])
    # n2 has no image fixing A and keeping P; n1 must stay put
    assert not exists_retraction(big, small)
    small2 = Instance.from_atoms([atom("E", A, n1), atom("P", n1)])
    assert exists_retraction(big.with_atoms([atom("P", n1)]), small2)


def test_retraction_identity():
    inst = Instance.from_atoms([atom("E", A, B)])
    assert exists_retraction(inst, inst)


# -- enumerate_homomorphisms -------------------------------------------------

def test_enumerate_respects_cap_and_is_complete():
    dst = Instance.from_atoms([atom("P", A), atom("P", B), atom("P", C)])
    all_h = enumerate_homomorphisms([atom("P", X)], dst, cap=10)
    assert {h[X] for h in all_h} == {A, B, C}
    assert len(enumerate_homomorphisms([atom("P", X)], dst, cap=2)) == 2


def brute_force_exists(src_atoms, dst):
    """Reference decision: try every map from mappable terms to the domain."""
    dom = sorted(
        {t for a in dst for t in a.args}, key=lambda t: (t.__class__.__name__, str(t))
    )
    movable = sorted(
        {t for a in src_atoms for t in a.args if not isinstance(t, Constant)},
        key=str,
    )
    target = set(dst)
    if not movable:
        return all(a in target for a in src_atoms)
    for images in itertools.product(dom, repeat=len(movable)):
        binding = dict(zip(movable, images))
        if all(a in target for a in apply_binding(src_atoms, binding)):
            return True
    return False


terms_st = st.sampled_from([A, B, C, X, Y, Z])
atom_st = st.builds(lambda s, t: atom("E", s, t), terms_st, terms_st) | st.builds(
    lambda s: atom("P", s), terms_st
)


@settings(deadline=None, max_examples=120)
@given(
    src=st.lists(atom_st, min_size=1, max_size=4),
    dst=st.lists(atom_st.filter(lambda a: not a.variables()), min_size=0, max_size=6),
)
def test_search_agrees_with_brute_force(src, dst):
    target = Instance.from_atoms(dst)
    got = find_homomorphism(src, target)
    expected = brute_force_exists(src, list(target))
    assert (got is not None) == expected
    if got is not None:
        assert_is_hom(src, target, got)
    assert bool(enumerate_homomorphisms(src, target, cap=1)) == expected
