"""Proof kernel for a constructive first-order logic of two-player games.

Check natural-deduction proofs of game formulas, normalize proof terms by
their operational semantics, extract executable winning strategies, and
play them against adversaries over exact rational state.
"""

from .checker import CheckError, Checker, check, check_result
from .engine import (
    ACTIVE,
    DORMANT,
    CounterExample,
    DemonMenu,
    InteractiveDemon,
    RandomDemon,
    ScriptedDemon,
    close,
    play,
    verify_exhaustive,
)
from .extraction import (
    UncheckedInput,
    extract,
    extract_disjunct,
    extract_existential,
    validate_existential,
)
from .normalizer import FuelExhausted, is_normal, is_simple, normalize, step
from .oracle import ArithOracle
from .parser import ParseError, parse_script
from .printer import print_formula, print_game, print_proof, print_term
from .proofterms import Context
from .syntax import State, eval_fo, eval_term

__all__ = [
    "ACTIVE", "DORMANT", "ArithOracle", "CheckError", "Checker", "Context",
    "CounterExample", "DemonMenu", "FuelExhausted", "InteractiveDemon",
    "ParseError", "RandomDemon", "ScriptedDemon", "State", "UncheckedInput",
    "check", "check_result", "close", "eval_fo", "eval_term", "extract",
    "extract_disjunct", "extract_existential", "is_normal", "is_simple",
    "normalize", "parse_script", "play", "print_formula", "print_game",
    "print_proof", "print_term", "step", "validate_existential",
    "verify_exhaustive",
]
