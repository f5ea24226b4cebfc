"""Compression-driven multiple alignment over symbol sequences."""

__version__ = "0.1.0"

from .model import (
    NEW_SEPARATOR,
    AlignmentError,
    Column,
    Grammar,
    MultipleAlignment,
    Pattern,
    Span,
    SymbolTable,
    combine_new,
    new_pattern,
    serialize_alignment,
    validate_grammar,
)
from .matcher import Hit, HitSequence, SearchBudget, brute_force_best_match, find_matches
from .engine import (
    AnalysisResult,
    EngineParams,
    ScoredAlignment,
    alignment_probabilities,
    analyse,
    analyse_serialized,
    merge,
    score_alignment,
)
from .grammar_io import (
    FormatError,
    dump_grammar,
    format_pattern,
    load_grammar,
    load_new,
    parse_grammar_text,
    parse_new_text,
    parse_pattern_line,
    save_grammar,
)
from .learner import (
    LearnParams,
    LearnResult,
    ScoredGrammar,
    evaluate_grammar,
    learn,
    learn_from_encodings,
    union_grammar,
)
from .runtime import MatchIndex, TaskFailure, map_tasks
from .neural import InhibitionNetwork, NeuralParams, PatternAssembly
from .audit import AuditRecord, AuditTrail, run_fingerprint, write_audit
from .render import (
    RenderedStructure,
    parse_rendering,
    render,
    render_columns,
    render_rows,
    structure_of,
)

__all__ = [
    "AuditRecord",
    "AuditTrail",
    "NEW_SEPARATOR",
    "AlignmentError",
    "AnalysisResult",
    "Column",
    "EngineParams",
    "FormatError",
    "Grammar",
    "Hit",
    "HitSequence",
    "InhibitionNetwork",
    "LearnParams",
    "LearnResult",
    "MatchIndex",
    "MultipleAlignment",
    "NeuralParams",
    "Pattern",
    "PatternAssembly",
    "RenderedStructure",
    "ScoredAlignment",
    "ScoredGrammar",
    "SearchBudget",
    "Span",
    "SymbolTable",
    "TaskFailure",
    "alignment_probabilities",
    "analyse",
    "analyse_serialized",
    "brute_force_best_match",
    "combine_new",
    "dump_grammar",
    "evaluate_grammar",
    "find_matches",
    "format_pattern",
    "learn",
    "learn_from_encodings",
    "load_grammar",
    "load_new",
    "map_tasks",
    "merge",
    "new_pattern",
    "parse_grammar_text",
    "parse_new_text",
    "parse_pattern_line",
    "parse_rendering",
    "render",
    "render_columns",
    "render_rows",
    "run_fingerprint",
    "save_grammar",
    "score_alignment",
    "serialize_alignment",
    "structure_of",
    "union_grammar",
    "validate_grammar",
    "write_audit",
]
