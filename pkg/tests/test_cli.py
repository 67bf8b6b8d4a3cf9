"""Command-line interface: exit codes, output formats, file handling."""

from __future__ import annotations

import json
import re

import pytest

from exchase.cli import main
from exchase.compiler import ruleset_from_ratios
from exchase.minsky import Ratio
from exchase.textio import parse_rules, render_rules

GROWTH = "[g] P(X, Y) -> P(Y, Z), P(Z, Z).\n"
DATALOG = "P(X) -> Q(X).\n"

M1_JSON = {
    "states": ["q1"],
    "delta": [
        {"from": "q1", "b1": b1, "b2": b2, "to": "q1", "d1": 1, "d2": 0}
        for b1 in (0, 1)
        for b2 in (0, 1)
    ],
}
T3_JSON = {
    "states": ["q1"],
    "delta": [
        {"from": "q1", "b1": 0, "b2": 0, "to": "q1", "d1": 1, "d2": 0},
        {"from": "q1", "b1": 1, "b2": 0, "to": "q1", "d1": 0, "d2": 1},
        {"from": "q1", "b1": 1, "b2": 1, "to": "q1", "d1": -1, "d2": 0},
    ],
}


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    """Shared input files keyed by short name."""
    d = tmp_path_factory.mktemp("cli")
    out = {}

    def put(name, text):
        p = d / name
        p.write_text(text)
        out[name] = str(p)

    put("growth.erl", GROWTH)
    put("dl.erl", DATALOG)
    put("odd.erl", "[s] End(X) -> S0(Y, X), S0(Y, Y).\n")
    put("loop.inst", "P(a, a).\n")
    put("pa.inst", "P(a).\n")
    put("end.inst", "End(w).\n")
    put("qx.q", "Q(X).\n")
    put("ra.q", "R(a).\n")
    put("qc.q", "Q(c).\n")
    put("s0xy.q", "S0(X, Y).\n")
    put("m1.json", json.dumps(M1_JSON))
    put("t3.json", json.dumps(T3_JSON))
    put("bad.json", "{nope")
    put("bad.erl", "P(a) -> Q(X).\nR(b).\n")
    rs6 = ruleset_from_ratios(
        6, [Ratio(3, 2) if i % 2 == 0 else Ratio(2, 1) for i in range(6)]
    )
    put("p6.erl", render_rules(rs6.rules))
    out["dir"] = str(d)
    return out


# ---------------------------------------------------------------------------
# usage and input errors


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == 64
    assert "usage error: a subcommand is required" in capsys.readouterr().err


def test_entails_needs_a_semantics_flag(files, capsys):
    argv = ["entails", "--rules", files["dl.erl"], "--instance", files["pa.inst"],
            "--query", files["qx.q"]]
    assert main(argv) == 64
    assert "choose --class-c or give --max-rounds" in capsys.readouterr().err
    assert main(argv + ["--class-c", "--max-rounds", "2"]) == 64
    assert "mutually exclusive" in capsys.readouterr().err


def test_missing_file(files, capsys):
    code = main(["chase", "--rules", files["dir"] + "/none.erl",
                 "--instance", files["loop.inst"]])
    assert code == 65
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    assert "none.erl" in err


def test_parse_errors_carry_positions(files, capsys):
    code = main(["chase", "--rules", files["bad.erl"],
                 "--instance", files["loop.inst"]])
    assert code == 65
    err = capsys.readouterr().err
    # every diagnostic on its own path:line:col line
    assert f"{files['bad.erl']}:1:3: constant in a rule" in err
    assert f"{files['bad.erl']}:2:5: expected '->', found '.'" in err


def test_bad_machine_json(files, capsys):
    assert main(["compile-3cm", files["bad.json"]]) == 65
    assert "error: " in capsys.readouterr().err


def test_internal_errors_exit_70(files, capsys, monkeypatch):
    import exchase.cli as cli

    def boom(*args, **kwargs):
        raise RuntimeError("kaput")

    monkeypatch.setattr(cli, "run_chase", boom)
    code = main(["chase", "--rules", files["dl.erl"],
                 "--instance", files["pa.inst"]])
    assert code == 70
    assert "internal error: RuntimeError: kaput" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# chase


def test_chase_stats_and_trace(files, capsys, tmp_path):
    trace = tmp_path / "trace.txt"
    code = main(["chase", "--rules", files["growth.erl"],
                 "--instance", files["loop.inst"],
                 "--max-rounds", "2", "--stats", "--trace", str(trace)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "bound_reached(2)"
    assert re.fullmatch(r"rounds=2 atoms=5 nulls=2 wall=\d+\.\d{3}s", lines[1])
    assert trace.read_text() == (
        "round 1 rule g binding X=a,Y=a new 2 atoms\n"
        "round 2 rule g binding X=a,Y=_n0 new 2 atoms\n"
    )


# ---------------------------------------------------------------------------
# entails


def test_entails_exit_codes(files, capsys):
    base = ["entails", "--rules", files["dl.erl"], "--instance", files["pa.inst"]]
    assert main(base + ["--query", files["qx.q"], "--max-rounds", "3"]) == 0
    assert capsys.readouterr().out == "entailed@0\nwitness: X -> a\n"
    assert main(base + ["--query", files["ra.q"], "--max-rounds", "3"]) == 1
    assert capsys.readouterr().out == "not_entailed@0\n"
    code = main(["entails", "--rules", files["growth.erl"],
                 "--instance", files["loop.inst"],
                 "--query", files["qc.q"], "--max-rounds", "2"])
    assert code == 2
    assert capsys.readouterr().out == "bound_reached@2\n"


def test_entails_class_c_on_compiled_rules(files, capsys, tmp_path):
    rules_path = tmp_path / "m1.erl"
    main(["compile-3cm", files["m1.json"], "-o", str(rules_path)])
    capsys.readouterr()
    code = main(["entails", "--rules", str(rules_path),
                 "--instance", files["end.inst"],
                 "--query", files["s0xy.q"], "--class-c"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "entailed@3"
    assert re.fullmatch(r"witness: X -> _n\d+, Y -> w", out.splitlines()[1])


def test_entails_class_c_falls_back_on_plain_rules(files, capsys):
    code = main(["entails", "--rules", files["dl.erl"],
                 "--instance", files["pa.inst"],
                 "--query", files["qx.q"], "--class-c"])
    assert code == 0
    captured = capsys.readouterr()
    assert "falling back to bounded semantics" in captured.err
    assert "(downgraded)" in captured.out


# ---------------------------------------------------------------------------
# machine subcommands


def test_compile_writes_rule_file(files, capsys, tmp_path):
    out_path = tmp_path / "m1.erl"
    assert main(["compile-3cm", files["m1.json"], "-o", str(out_path)]) == 0
    assert capsys.readouterr().out == f"wrote 636 rules (p=210) to {out_path}\n"
    rules = parse_rules(out_path.read_text())
    assert len(rules) == 636
    assert rules[0].id == "R_S"


def test_compile_to_stdout(files, capsys):
    assert main(["compile-3cm", files["m1.json"]]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[R_S] S0(X, Y) -> S(X, Y) .")
    assert len(out.splitlines()) == 636


def test_simulate_halting_machine(files, capsys):
    assert main(["simulate-3cm", files["t3.json"]]) == 0
    assert capsys.readouterr().out == (
        "step 0: (q1, 0, 0, 0)\n"
        "step 1: (q1, 1, 0, 1)\n"
        "step 2: (q1, 1, 1, 2)\n"
        "step 3: (q1, 0, 1, 3)\n"
        "halted(3)\n"
    )


def test_simulate_reports_running_at_step_cap(files, capsys):
    assert main(["simulate-3cm", files["m1.json"], "--max-steps", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "running"
    assert len(lines) == 4  # steps 0..2 plus the verdict


# ---------------------------------------------------------------------------
# analyze


def analyze_records(out):
    """The JSON line following each human-readable report line."""
    return [json.loads(l) for l in out.splitlines() if l.startswith("{")]


def test_analyze_passing_checks(files, capsys):
    code = main(["analyze", "--rules", files["p6.erl"],
                 "--instance", files["end.inst"],
                 "--check", "chain", "--check", "flood", "--rounds", "3"])
    assert code == 0
    out = capsys.readouterr().out
    assert "chain: pass (w:3)" in out
    recs = analyze_records(out)
    assert [r["check"] for r in recs] == ["chain", "flood"]
    assert all(r["passed"] and r["counterexample"] == [] for r in recs)


def test_analyze_failing_check_exits_1(files, capsys):
    code = main(["analyze", "--rules", files["odd.erl"],
                 "--instance", files["end.inst"],
                 "--check", "chain", "--rounds", "1"])
    assert code == 1
    out = capsys.readouterr().out
    assert "chain: FAIL" in out
    (rec,) = analyze_records(out)
    assert rec["passed"] is False
    assert rec["counterexample"] == ["S0(_n0, _n0)"]
    assert rec["detail"] == "chain term _n0 reused"


def test_analyze_critical_check(files, capsys):
    code = main(["analyze", "--rules", files["p6.erl"],
                 "--instance", files["end.inst"],
                 "--check", "critical", "--rounds", "0"])
    assert code == 0
    out = capsys.readouterr().out
    assert "critical: pass (17 atoms each side)" in out


def test_analyze_clique_check(files, capsys):
    code = main(["analyze", "--rules", files["p6.erl"],
                 "--instance", files["end.inst"],
                 "--check", "clique", "--rounds", "3",
                 "--k", "3", "--pred", "R_0"])
    assert code == 0
    (rec,) = analyze_records(capsys.readouterr().out)
    assert rec["detail"] == "R_0 3-clique: true"


def test_analyze_arith_needs_compiled_rules(files, capsys):
    code = main(["analyze", "--rules", files["growth.erl"],
                 "--instance", files["loop.inst"],
                 "--check", "arith", "--rounds", "2"])
    assert code == 65
    assert "the arith check needs a compiled rule set" in capsys.readouterr().err
