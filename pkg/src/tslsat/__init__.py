"""Satisfiability checking for Temporal Stream Logic modulo uninterpreted functions."""
from .engine import (
    SAT,
    UNKNOWN,
    UNSAT,
    CheckerConfig,
    Verdict,
    Witness,
    check_text,
    check_validity,
    run_checker,
    witness_validate,
)
from .euf import EufQuery, EufResult, check_query
from .formula import show
from .ltl import FINITARY, GENERAL
from .parser import ParseError, parse_formula

__all__ = [
    "FINITARY",
    "GENERAL",
    "SAT",
    "UNKNOWN",
    "UNSAT",
    "CheckerConfig",
    "EufQuery",
    "EufResult",
    "ParseError",
    "Verdict",
    "Witness",
    "check_query",
    "check_text",
    "check_validity",
    "parse_formula",
    "run_checker",
    "show",
    "witness_validate",
]
