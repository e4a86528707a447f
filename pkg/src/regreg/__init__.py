"""Backtracking grammar parsing with deterministic nesting: a linear-time memoizing
matcher for structured grammars, static grammar analysis and a reference parser."""

from .actions import NOVALUE, ActionError, ParseNode
from .engine import EngineOptions, ParseOutcome, RecursionGuardError, match_expr, run
from .expr import Pool
from .frontend import (Diagnostic, GrammarError, compile_grammar, format_grammar,
                       load_grammar, parse_grammar, validate)
from .grammar import Grammar

__all__ = [
    "NOVALUE", "ActionError", "ParseNode", "EngineOptions", "ParseOutcome",
    "RecursionGuardError", "match_expr", "run", "Pool", "Diagnostic", "GrammarError",
    "compile_grammar", "format_grammar", "load_grammar", "parse_grammar", "validate",
    "Grammar",
]
