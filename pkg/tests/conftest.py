import pytest

from exchase import (
    Constant,
    Instance,
    KnowledgeBase,
    ThreeCM,
    atom,
    compile_machine,
    run_chase,
)
from exchase._kernels import warm


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Pay the JIT cost once, before any timed test runs.
    warm()


# Machines used across the suite.  M1 loops forever incrementing counter 1;
# H halts immediately (no transitions); ONE makes a single step; T3 halts
# after exactly three steps with the counters back at a stuck flag pattern.

@pytest.fixture(scope="session")
def m1():
    total = {("q1", a, b): ("q1", 1, 0) for a in (0, 1) for b in (0, 1)}
    return ThreeCM(states=("q1",), delta=total)


@pytest.fixture(scope="session")
def machine_h():
    return ThreeCM(states=("q1",), delta={})


@pytest.fixture(scope="session")
def machine_one():
    return ThreeCM(states=("q1",), delta={("q1", 0, 0): ("q1", 1, 0)})


@pytest.fixture(scope="session")
def machine_t3():
    return ThreeCM(
        states=("q1",),
        delta={
            ("q1", 0, 0): ("q1", 1, 0),
            ("q1", 1, 0): ("q1", 0, 1),
            ("q1", 1, 1): ("q1", -1, 0),
        },
    )


@pytest.fixture(scope="session")
def rs_m1(m1):
    return compile_machine(m1)


@pytest.fixture(scope="session")
def end_w(rs_m1):
    return Instance.from_atoms(
        [atom("End", Constant("w"))], schema=rs_m1.predicates.copy()
    )


@pytest.fixture(scope="session")
def m1_depth3(rs_m1, end_w):
    """SO chase of {End(w)} under M1 to depth 3, shared by read-only tests."""
    kb = KnowledgeBase(rules=rs_m1.rules, instance=end_w)
    out = run_chase(kb, "so", max_rounds=3)
    assert str(out.status) == "bound_reached(3)"
    return out.result
