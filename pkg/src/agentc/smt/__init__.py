"""Solver integration: session contract, in-process z3, SMT-LIB 2 pipe."""

from .session import (
    SAT,
    SMT_CMD_ENV,
    UNKNOWN,
    UNSAT,
    SatResult,
    SessionStats,
    SolverSession,
    open_session,
)
from .smtlib import assert_line, declaration_lines, formula_text, script, term_text

__all__ = [
    "SAT", "UNSAT", "UNKNOWN", "SMT_CMD_ENV",
    "SatResult", "SessionStats", "SolverSession", "open_session",
    "assert_line", "declaration_lines", "formula_text", "script", "term_text",
]
