"""Substructural type checker and interpreter for LinLang."""

from .checker import (
    MODES, Binding, CheckResult, Checker, Code, Context, Diagnostic, Mode,
    StructuralRuleSet, check_program, rules_for,
)
from .runtime import (
    EntropyUnavailable, EvalError, NonceSource, SeededPrng, SystemEntropy,
    UseLedger, eval_instrumented, eval_term, fresh_nonce,
)
from .syntax import LexError, ParseError, parse, parse_source, pretty, tokenize

__all__ = [
    "MODES", "Binding", "CheckResult", "Checker", "Code", "Context", "Diagnostic",
    "EntropyUnavailable", "EvalError", "LexError", "Mode", "NonceSource", "ParseError",
    "SeededPrng", "StructuralRuleSet", "SystemEntropy", "UseLedger", "check_program",
    "eval_instrumented", "eval_term", "fresh_nonce", "parse", "parse_source", "pretty",
    "rules_for", "tokenize",
]
