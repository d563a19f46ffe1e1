"""Automata: LTL tableau, Büchi stream automata, execution effects, HOA I/O."""
from .bsa import (
    BSA,
    DEFAULT_LETTER_CAP,
    PARTIAL,
    TOTAL,
    ExecutionEffect,
    LetterCapExceeded,
    Transition,
    buchi_nonempty_from,
    effect_empty,
    effect_extend,
    effect_of_run,
    find_syntactic_conflict,
    letter_word,
    nba_to_bsa,
)
from .hoa import HoaError, ap_from_name, parse_hoa, write_hoa
from .tableau import NBA, AutomatonTooLarge, Edge, ltl_to_nba, nba_accepts_lasso

__all__ = [
    "AutomatonTooLarge",
    "BSA",
    "DEFAULT_LETTER_CAP",
    "NBA",
    "PARTIAL",
    "TOTAL",
    "Edge",
    "ExecutionEffect",
    "HoaError",
    "LetterCapExceeded",
    "Transition",
    "ap_from_name",
    "buchi_nonempty_from",
    "effect_empty",
    "effect_extend",
    "effect_of_run",
    "find_syntactic_conflict",
    "letter_word",
    "ltl_to_nba",
    "nba_accepts_lasso",
    "nba_to_bsa",
    "parse_hoa",
    "write_hoa",
]
