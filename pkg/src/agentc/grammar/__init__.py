"""Tool-call text grammar: parsing, occurrence extraction, type checking."""

from .toolcall import (
    FN_END,
    FN_START,
    GRAMMAR_TEXT,
    NONTERMINALS,
    CompositeValue,
    Occurrence,
    ParsedCall,
    RawValue,
    ToolCallText,
    parse_nonterminal,
    parse_toolcall,
    render_args,
    render_call,
    render_value,
)
from .typecheck import ArgVerdict, TypeCheckResult, type_check_and_completeness

__all__ = [
    "FN_END", "FN_START", "GRAMMAR_TEXT", "NONTERMINALS",
    "CompositeValue", "Occurrence", "ParsedCall", "RawValue", "ToolCallText",
    "parse_nonterminal", "parse_toolcall",
    "render_args", "render_call", "render_value",
    "ArgVerdict", "TypeCheckResult", "type_check_and_completeness",
]
