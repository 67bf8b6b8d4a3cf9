"""Reasoning with existential rules: chase variants, counter-machine
compilation, terminating query entailment and structural analysis.

The core objects live in `model` (terms, atoms, rules, instances), the
execution engine in `chase`, and query answering in `homomorphism` and
`entailment`. `minsky` and `compiler` turn three-counter machines into rule
sets whose chase behaviour mirrors the machine's run; `analyzer` checks
chase outputs against the arithmetic those rule sets encode. `textio` and
`cli` provide the text formats and the command line.
"""
from .model import (
    Atom,
    Constant,
    Instance,
    KnowledgeBase,
    ModelError,
    Null,
    Rule,
    RuleError,
    Schema,
    SchemaError,
    Term,
    Variable,
    active_domain,
    atom,
    atoms_by_predicate,
    render_term,
    validate_rule,
)
from .homomorphism import (
    Binding,
    apply_binding,
    enumerate_homomorphisms,
    evaluate_bcq,
    exists_retraction,
    find_homomorphism,
)
from .chase import (
    VARIANTS,
    ChaseOutcome,
    ChaseStatus,
    Derivation,
    DerivationStep,
    Trigger,
    datalog_saturate,
    enumerate_triggers,
    is_applicable,
    run_chase,
    step,
)
from .minsky import (
    Configuration,
    NonIntegralResult,
    PrimeBasis,
    Ratio,
    RunOutcome,
    ThreeCM,
    enc,
    g,
    g_orbit,
    initial_configuration,
    next_configuration,
    ratio_for_residue,
    run_machine,
)
from .compiler import (
    CompiledRuleSet,
    compile_machine,
    critical_instance,
    end_instance,
    recognize_compiled,
    ruleset_from_ratios,
)
from .entailment import (
    EntailmentVerdict,
    chase_to_depth,
    decide_bcq_bounded,
    decide_bcq_class_c,
    query_depth,
)
from .analyzer import (
    ChainDecomposition,
    StructureReport,
    chain_decomposition,
    clique_witness,
    compare_critical,
    flood_report,
    verify_arithmetic,
)
from .textio import (
    Diagnostic,
    ParseError,
    SourceSpan,
    parse_instance,
    parse_query,
    parse_rules,
    render_atom,
    render_instance,
    render_query,
    render_rules,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "Binding",
    "ChainDecomposition",
    "ChaseOutcome",
    "ChaseStatus",
    "CompiledRuleSet",
    "Configuration",
    "Constant",
    "Derivation",
    "DerivationStep",
    "Diagnostic",
    "EntailmentVerdict",
    "Instance",
    "KnowledgeBase",
    "ModelError",
    "NonIntegralResult",
    "Null",
    "ParseError",
    "PrimeBasis",
    "Ratio",
    "Rule",
    "RuleError",
    "RunOutcome",
    "Schema",
    "SchemaError",
    "SourceSpan",
    "StructureReport",
    "Term",
    "ThreeCM",
    "Trigger",
    "VARIANTS",
    "Variable",
    "active_domain",
    "apply_binding",
    "atom",
    "atoms_by_predicate",
    "chain_decomposition",
    "chase_to_depth",
    "clique_witness",
    "compare_critical",
    "compile_machine",
    "critical_instance",
    "datalog_saturate",
    "decide_bcq_bounded",
    "decide_bcq_class_c",
    "enc",
    "end_instance",
    "enumerate_homomorphisms",
    "enumerate_triggers",
    "evaluate_bcq",
    "exists_retraction",
    "find_homomorphism",
    "flood_report",
    "g",
    "g_orbit",
    "initial_configuration",
    "is_applicable",
    "next_configuration",
    "parse_instance",
    "parse_query",
    "parse_rules",
    "query_depth",
    "ratio_for_residue",
    "recognize_compiled",
    "render_atom",
    "render_instance",
    "render_query",
    "render_rules",
    "render_term",
    "ruleset_from_ratios",
    "run_chase",
    "run_machine",
    "step",
    "validate_rule",
    "verify_arithmetic",
]
