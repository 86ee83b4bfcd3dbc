"""Policy specification language: syntax, normalization, validation."""

from .ast import (
    SORT_BOOL,
    SORT_INT,
    SORT_REAL,
    SORT_STRING,
    SORTS,
    After,
    And,
    ArgPattern,
    Before,
    BoolTerm,
    CAnd,
    CNot,
    COr,
    Comparison,
    Constant,
    Constraint,
    EventConstraint,
    Exists,
    Forall,
    Formula,
    FunctionApp,
    Not,
    Operand,
    Or,
    OutputRef,
    Seq,
    SpecAst,
    StateRef,
    TRUE,
    Variable,
    WILDCARD,
    Wildcard,
    format_spec,
)
from .catalog import (
    BUILTIN_TOOLS,
    END_ERROR,
    END_MARKERS,
    END_SAFE,
    ProjectionCatalog,
    ProjectionParam,
    ProjectionSig,
    ToolCatalog,
    ToolParam,
    ToolSig,
)
from .nnf import to_nnf
from .parser import parse_spec
from .validate import ValidatedSpec, validate_spec

__all__ = [
    "After", "And", "ArgPattern", "Before", "BoolTerm", "CAnd", "CNot", "COr",
    "Comparison", "Constant", "Constraint", "EventConstraint", "Exists",
    "Forall", "Formula", "FunctionApp", "Not", "Operand", "Or", "OutputRef",
    "Seq", "SpecAst", "StateRef", "TRUE", "Variable", "WILDCARD", "Wildcard",
    "format_spec", "BUILTIN_TOOLS", "END_ERROR", "END_MARKERS", "END_SAFE",
    "ProjectionCatalog", "ProjectionParam", "ProjectionSig", "ToolCatalog",
    "ToolParam", "ToolSig", "to_nnf", "parse_spec", "ValidatedSpec",
    "validate_spec", "SORT_BOOL", "SORT_INT", "SORT_REAL", "SORT_STRING",
    "SORTS",
]
