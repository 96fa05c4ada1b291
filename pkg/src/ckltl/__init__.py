"""Model checking for a linear-time logic with knowledge and counterfactuals.

The package evaluates formulas combining past/future temporal operators,
knowledge under synchronous perfect recall, and variably strict
counterfactuals over a finite universe of lasso traces, and translates the
logic into two-sorted first-order sentences checked by a brute-force
evaluator over the same bounded universe.
"""

from .formula import (
    And,
    Atom,
    EMight,
    Eventually,
    FalseConst,
    Formula,
    Globally,
    Historically,
    Iff,
    Implies,
    Know,
    Might,
    Next,
    Not,
    Once,
    Or,
    ParseError,
    Prev,
    RelationalFormula,
    RelationalFormulaError,
    Since,
    TracedAtom,
    TrueConst,
    Until,
    UWould,
    Would,
    build_minimal_antecedent,
    conjoin,
    desugar,
    disjoin,
    parse,
    subformulas,
    to_source,
    validate_relational,
)
from .model import (
    InvariantViolation,
    KripkeStructure,
    ModelFormatError,
    System,
    UnknownAgentError,
    load_system,
    save_system,
    subset_similarity,
    system_from_dict,
    system_to_dict,
)
from .semantics import (
    BOUNDED,
    EXACT_LASSO,
    EvalContext,
    SatisfactionTable,
    SimilarityReport,
    StabilizationCapExceeded,
    TrailEntry,
    Verdict,
    check_system,
    closest_antecedents,
    eval_at,
    explain,
    similarity_holds,
    stabilize,
    validate_similarity,
)
from .specs import (
    AttrLiteral,
    AttributeVocabulary,
    ProbeMember,
    ProbeReport,
    build_ece,
    build_gce,
    build_ice,
    build_wce,
    entailment_probe,
    position_variant,
    satisfiable_pairs,
)
from .trace import (
    LassoTrace,
    NotAPathOfModel,
    SizeLimitExceeded,
    TraceUniverse,
    add_trace,
    format_trace,
    generate_universe,
    is_model_trace,
    obs_divergence_point,
    parse_trace_literal,
    universe_of,
    zip3,
)

__version__ = "0.1.0"

__all__ = [
    "add_trace",
    "And",
    "Atom",
    "AttributeVocabulary",
    "AttrLiteral",
    "BOUNDED",
    "build_ece",
    "build_gce",
    "build_ice",
    "build_minimal_antecedent",
    "build_wce",
    "check_system",
    "closest_antecedents",
    "conjoin",
    "desugar",
    "disjoin",
    "EMight",
    "entailment_probe",
    "eval_at",
    "EvalContext",
    "Eventually",
    "EXACT_LASSO",
    "explain",
    "FalseConst",
    "format_trace",
    "Formula",
    "generate_universe",
    "Globally",
    "Historically",
    "Iff",
    "Implies",
    "InvariantViolation",
    "is_model_trace",
    "Know",
    "KripkeStructure",
    "LassoTrace",
    "load_system",
    "Might",
    "ModelFormatError",
    "Next",
    "Not",
    "NotAPathOfModel",
    "obs_divergence_point",
    "Once",
    "Or",
    "parse",
    "parse_trace_literal",
    "ParseError",
    "position_variant",
    "Prev",
    "ProbeMember",
    "ProbeReport",
    "RelationalFormula",
    "RelationalFormulaError",
    "SatisfactionTable",
    "satisfiable_pairs",
    "save_system",
    "similarity_holds",
    "SimilarityReport",
    "Since",
    "SizeLimitExceeded",
    "StabilizationCapExceeded",
    "stabilize",
    "subformulas",
    "subset_similarity",
    "System",
    "system_from_dict",
    "system_to_dict",
    "to_source",
    "TracedAtom",
    "TraceUniverse",
    "TrailEntry",
    "TrueConst",
    "universe_of",
    "UnknownAgentError",
    "Until",
    "UWould",
    "validate_relational",
    "validate_similarity",
    "Verdict",
    "Would",
    "zip3",
]
