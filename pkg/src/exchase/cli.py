"""Command-line interface.

Subcommands: chase (run a chase and report its status), entails (Boolean
query answering, exit code 0/1/2 for entailed / not entailed / bound
reached), compile-3cm (counter machine JSON to a rule file), simulate-3cm
(run a counter machine directly) and analyze (structural checks on a chase
output). Other exit codes: 64 bad usage, 65 unreadable or unparseable
input, 70 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Callable, Optional, Sequence

from .analyzer import (
    ChainDecomposition,
    StructureReport,
    chain_decomposition,
    clique_witness,
    compare_critical,
    flood_report,
    verify_arithmetic,
)
from .chase import VARIANTS, run_chase
from .compiler import compile_machine, recognize_compiled
from .entailment import chase_to_depth, decide_bcq_bounded, decide_bcq_class_c
from .minsky import ThreeCM, initial_configuration, next_configuration
from .model import KnowledgeBase, ModelError, Null, render_term
from .textio import (
    ParseError,
    parse_instance,
    parse_query,
    parse_rules,
    render_atom,
    render_rules,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


class _InputError(Exception):
    """Unreadable or unparseable input; the message lists every problem."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _InputError(f"{path}: {e.strerror or e}") from e


def _parse_file(fn: Callable[[str], object], path: str):
    try:
        return fn(_read(path))
    except ParseError as e:
        lines = [
            f"{path}:{d.span.line}:{d.span.column}: {d.message}"
            for d in e.diagnostics
        ]
        raise _InputError("\n".join(lines)) from e


def _load_machine(path: str) -> ThreeCM:
    try:
        obj = json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise _InputError(f"{path}: {e}") from e
    return ThreeCM.from_json(obj)


def _null_count(instance) -> int:
    return sum(1 for t in instance.active_domain() if isinstance(t, Null))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_chase(args: argparse.Namespace) -> int:
    rules = _parse_file(parse_rules, args.rules)
    instance = _parse_file(parse_instance, args.instance)
    kb = KnowledgeBase(rules=tuple(rules), instance=instance)
    t0 = time.perf_counter()
    out = run_chase(kb, args.variant, max_rounds=args.max_rounds,
                    trace=args.trace is not None)
    wall = time.perf_counter() - t0
    print(out.status)
    if args.stats:
        print(
            f"rounds={out.status.rounds} atoms={len(out.result)} "
            f"nulls={_null_count(out.result)} wall={wall:.3f}s"
        )
    if args.trace is not None:
        Path(args.trace).write_text(out.derivation.render_trace() + "\n")
    return 0


def _cmd_entails(args: argparse.Namespace) -> int:
    if args.class_c and args.max_rounds is not None:
        raise _UsageError("--class-c and --max-rounds are mutually exclusive")
    if not args.class_c and args.max_rounds is None:
        raise _UsageError("choose --class-c or give --max-rounds")
    rules = _parse_file(parse_rules, args.rules)
    instance = _parse_file(parse_instance, args.instance)
    query = _parse_file(parse_query, args.query)
    if args.class_c:
        rs = recognize_compiled(rules)
        if rs is None:
            print(
                "warning: rules do not match any compiled machine; "
                "falling back to bounded semantics",
                file=sys.stderr,
            )
            verdict = decide_bcq_class_c(instance, tuple(rules), query)
        else:
            verdict = decide_bcq_class_c(instance, rs, query)
    else:
        kb = KnowledgeBase(rules=tuple(rules), instance=instance)
        verdict = decide_bcq_bounded(kb, query, args.variant, args.max_rounds)
    print(verdict)
    if verdict.witness is not None:
        pairs = sorted(
            (render_term(k), render_term(v)) for k, v in verdict.witness.items()
        )
        print("witness: " + ", ".join(f"{k} -> {v}" for k, v in pairs))
    return {"entailed": 0, "not_entailed": 1, "bound_reached": 2}[verdict.answer]


def _cmd_compile(args: argparse.Namespace) -> int:
    rs = compile_machine(_load_machine(args.machine))
    text = render_rules(rs.rules)
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
        print(f"wrote {len(rs.rules)} rules (p={rs.p}) to {args.output}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    machine = _load_machine(args.machine)
    cfg = initial_configuration(machine)
    for step in range(args.max_steps + 1):
        print(f"step {step}: ({cfg.state}, {cfg.v1}, {cfg.v2}, {cfg.t})")
        nxt = next_configuration(machine, cfg)
        if nxt is None:
            print(f"halted({step})")
            return 0
        cfg = nxt
    print("running")
    return 0


def _analyze_one(args, check: str, rules, instance, chased) -> StructureReport:
    if check == "chain":
        d = chain_decomposition(instance, chased)
        if isinstance(d, StructureReport):
            return d
        lengths = ", ".join(
            f"{render_term(a)}:{d.length(a)}" for a in d.anchors
        )
        return StructureReport("chain", True, detail=lengths)
    if check == "flood":
        return flood_report(instance, chased)
    if check == "arith":
        rs = recognize_compiled(rules)
        if rs is None:
            raise _InputError("the arith check needs a compiled rule set")
        d = chain_decomposition(instance, chased)
        if isinstance(d, StructureReport):
            return d
        if len(d.anchors) != 1:
            raise _InputError("the arith check needs a single-anchor instance")
        chain = d.chain(d.anchors[0])
        return verify_arithmetic(chased, rs, chain[-1])
    if check == "clique":
        found = clique_witness(chased, args.pred, args.k)
        return StructureReport(
            "clique", True, detail=f"{args.pred} {args.k}-clique: {str(found).lower()}"
        )
    if check == "critical":
        rs = recognize_compiled(rules)
        if rs is None:
            raise _InputError("the critical check needs a compiled rule set")
        return compare_critical(rs, args.rounds)
    raise _UsageError(f"unknown check {check}")


def _cmd_analyze(args: argparse.Namespace) -> int:
    rules = _parse_file(parse_rules, args.rules)
    instance = _parse_file(parse_instance, args.instance)
    needs_chase = set(args.check) - {"critical"}
    chased = None
    if needs_chase:
        chased = chase_to_depth(instance, tuple(rules), "so", args.rounds)
    failed = False
    for check in args.check:
        report = _analyze_one(args, check, rules, instance, chased)
        print(report)
        obj = {
            "check": check,
            "passed": report.passed,
            "detail": report.detail,
            "counterexample": [
                render_atom(a, allow_nulls=True) for a in report.counterexample
            ],
        }
        print(json.dumps(obj, sort_keys=True))
        if not report.passed:
            failed = True
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _build_parser() -> _ArgumentParser:
    top = _ArgumentParser(prog="exchase", description=__doc__)
    sub = top.add_subparsers(dest="command", parser_class=_ArgumentParser)

    p = sub.add_parser("chase", help="run a chase and print its status")
    p.add_argument("--variant", choices=VARIANTS, default="so")
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--rules", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--trace", metavar="FILE", default=None,
                   help="write the derivation trace to FILE")
    p.add_argument("--stats", action="store_true",
                   help="print rounds, atoms, nulls and wall time")
    p.set_defaults(func=_cmd_chase)

    p = sub.add_parser("entails", help="decide Boolean query entailment")
    p.add_argument("--rules", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--class-c", action="store_true", dest="class_c",
                   help="terminating procedure for compiled rule sets")
    p.add_argument("--variant", choices=VARIANTS, default="so")
    p.add_argument("--max-rounds", type=int, default=None)
    p.set_defaults(func=_cmd_entails)

    p = sub.add_parser("compile-3cm", help="compile a machine JSON to rules")
    p.add_argument("machine")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("simulate-3cm", help="run a counter machine")
    p.add_argument("machine")
    p.add_argument("--max-steps", type=int, default=1000)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="structural checks on a chase output")
    p.add_argument("--rules", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--check", action="append", required=True,
                   choices=["chain", "flood", "arith", "clique", "critical"])
    p.add_argument("--rounds", type=int, default=3,
                   help="chase depth for the checks (also the critical depth)")
    p.add_argument("--k", type=int, default=3, help="clique size to look for")
    p.add_argument("--pred", default="R_0", help="clique predicate")
    p.set_defaults(func=_cmd_analyze)
    return top


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise _UsageError("a subcommand is required (see --help)")
        return args.func(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 64
    except _InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 65
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 65
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 65
    except KeyboardInterrupt:
        return 70
    except Exception as e:  # noqa: BLE001 - last-resort mapping to exit 70
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 70


if __name__ == "__main__":
    sys.exit(main())
