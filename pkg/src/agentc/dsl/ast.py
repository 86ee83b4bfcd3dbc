"""Abstract syntax for the policy specification language.

A specification is a boolean combination of temporal predicates over events
(tool calls).  Each predicate carries one or two event constraints; an event
constraint names a tool, binds argument patterns, and attaches a boolean
constraint over the bound variables, past outputs, and state observations.

All nodes are immutable; structural equality is the identity used by tests
(round-trip, normalization idempotence).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

# ---------------------------------------------------------------- sorts

SORT_INT = "int"
SORT_REAL = "real"
SORT_STRING = "string"
SORT_BOOL = "bool"

SORTS = (SORT_INT, SORT_REAL, SORT_STRING, SORT_BOOL)

#: function symbols usable inside constraints, with (argument sorts, result).
#: Numeric operators accept int or real operands; int widens to real.
FUNCTIONS = ("+", "*", "strlen", "concat", "contains")

RELATIONS = ("==", ">=", ">", "<=", "<")  # `!=` desugars to Not(==) at parse


# ------------------------------------------------------------- value terms


@dataclass(frozen=True)
class Constant:
    value: Union[bool, int, float, str]

    @property
    def sort(self) -> str:
        # bool must be tested first: bool is a subclass of int.
        if isinstance(self.value, bool):
            return SORT_BOOL
        if isinstance(self.value, int):
            return SORT_INT
        if isinstance(self.value, float):
            return SORT_REAL
        return SORT_STRING


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class FunctionApp:
    fn: str
    args: tuple["LiteralTerm", ...]


#: plain value-level terms (no trace references)
LiteralTerm = Union[Constant, Variable, FunctionApp]


@dataclass(frozen=True)
class OutputRef:
    """The recorded output of the event bound by `binder`."""

    binder: str


@dataclass(frozen=True)
class StateRef:
    """A state observation: projection applied to pattern-bound variables."""

    projection: str
    args: tuple[str, ...]


#: anything that may stand on either side of a relation
Operand = Union[Constant, Variable, FunctionApp, OutputRef, StateRef]


# ------------------------------------------------------------- constraints


@dataclass(frozen=True)
class Comparison:
    rel: str
    lhs: Operand
    rhs: Operand


@dataclass(frozen=True)
class BoolTerm:
    """A bare boolean-sorted operand used as an atomic constraint."""

    operand: Operand


@dataclass(frozen=True)
class CNot:
    inner: "Constraint"


@dataclass(frozen=True)
class CAnd:
    lhs: "Constraint"
    rhs: "Constraint"


@dataclass(frozen=True)
class COr:
    lhs: "Constraint"
    rhs: "Constraint"


Constraint = Union[Comparison, BoolTerm, CNot, CAnd, COr]

#: the trivially-true constraint (the `True` slot in predicate syntax)
TRUE = BoolTerm(Constant(True))


def constraint_is_true(c: Constraint) -> bool:
    return isinstance(c, BoolTerm) and c.operand == Constant(True)


# ------------------------------------------------------------------ events


@dataclass(frozen=True)
class Wildcard:
    """`.*` — matches any argument value."""


WILDCARD = Wildcard()

ArgPattern = Union[Variable, Constant, Wildcard]


@dataclass(frozen=True)
class EventConstraint:
    tool: str
    arg_patterns: tuple[tuple[str, ArgPattern], ...]
    constraint: Constraint = TRUE
    binder: Union[str, None] = None

    def pattern_vars(self) -> tuple[str, ...]:
        seen: list[str] = []
        for _, pat in self.arg_patterns:
            if isinstance(pat, Variable) and pat.name not in seen:
                seen.append(pat.name)
        return tuple(seen)


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Before:
    """Every event matching `trigger` must be preceded by one matching
    `earlier` (with the joint constraint on `earlier` satisfied)."""

    trigger: EventConstraint
    earlier: EventConstraint


@dataclass(frozen=True)
class After:
    """Every event matching `trigger` must eventually be followed by one
    matching `later`."""

    trigger: EventConstraint
    later: EventConstraint


@dataclass(frozen=True)
class Seq:
    """Some event matching `second` occurs, preceded by one matching
    `first` (an existential two-step pattern)."""

    first: EventConstraint
    second: EventConstraint


@dataclass(frozen=True)
class Exists:
    event: EventConstraint


@dataclass(frozen=True)
class Forall:
    event: EventConstraint


@dataclass(frozen=True)
class Not:
    inner: "Formula"


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


Formula = Union[Before, After, Seq, Exists, Forall, Not, And, Or]

#: predicate (leaf) formula classes — the temporal atoms
PREDICATES = (Before, After, Seq, Exists, Forall)
BINARY_PREDICATES = (Before, After, Seq)


@dataclass(frozen=True)
class SpecAst:
    root: Formula


# -------------------------------------------------------------- traversal


def predicate_events(f: Formula):
    """Yield (node, evc, role) for every event constraint in the tree.

    role is "trigger" for the constraint whose matched event anchors the
    predicate's evaluation time, "partner" for the other one.
    """
    if isinstance(f, Before):
        yield f, f.trigger, "trigger"
        yield f, f.earlier, "partner"
    elif isinstance(f, After):
        yield f, f.trigger, "trigger"
        yield f, f.later, "partner"
    elif isinstance(f, Seq):
        # the later event anchors the outer quantifier
        yield f, f.second, "trigger"
        yield f, f.first, "partner"
    elif isinstance(f, (Exists, Forall)):
        yield f, f.event, "trigger"
    elif isinstance(f, Not):
        yield from predicate_events(f.inner)
    elif isinstance(f, (And, Or)):
        yield from predicate_events(f.lhs)
        yield from predicate_events(f.rhs)
    else:  # pragma: no cover - exhaustive over Formula
        raise TypeError(f"not a formula node: {f!r}")


def iter_predicates(f: Formula, negated: bool = False):
    """Yield (predicate_node, negated) for each temporal atom."""
    if isinstance(f, PREDICATES):
        yield f, negated
    elif isinstance(f, Not):
        yield from iter_predicates(f.inner, not negated)
    elif isinstance(f, (And, Or)):
        yield from iter_predicates(f.lhs, negated)
        yield from iter_predicates(f.rhs, negated)
    else:  # pragma: no cover
        raise TypeError(f"not a formula node: {f!r}")


def constraint_operands(c: Constraint):
    """Yield every Operand occurring in a constraint tree."""
    if isinstance(c, Comparison):
        yield c.lhs
        yield c.rhs
    elif isinstance(c, BoolTerm):
        yield c.operand
    elif isinstance(c, CNot):
        yield from constraint_operands(c.inner)
    elif isinstance(c, (CAnd, COr)):
        yield from constraint_operands(c.lhs)
        yield from constraint_operands(c.rhs)
    else:  # pragma: no cover
        raise TypeError(f"not a constraint node: {c!r}")


def operand_refs(op: Operand):
    """Yield nested StateRef/OutputRef/Variable leaves of an operand."""
    if isinstance(op, (StateRef, OutputRef, Variable)):
        yield op
    elif isinstance(op, FunctionApp):
        for a in op.args:
            yield from operand_refs(a)


# ------------------------------------------------------------ text output


def _fmt_value(v: Union[bool, int, float, str]) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v + '"'
    return repr(v)


def _fmt_operand(op: Operand) -> str:
    if isinstance(op, Constant):
        return _fmt_value(op.value)
    if isinstance(op, Variable):
        return op.name
    if isinstance(op, FunctionApp):
        return op.fn + "(" + ", ".join(_fmt_operand(a) for a in op.args) + ")"
    if isinstance(op, OutputRef):
        return f"output({op.binder})"
    if isinstance(op, StateRef):
        return f"state({op.projection}({', '.join(op.args)}))"
    raise TypeError(f"not an operand: {op!r}")  # pragma: no cover


def _fmt_constraint(c: Constraint, parent: str = "or") -> str:
    # precedence: not > and > or; parenthesize when a looser child appears
    # under a tighter parent.
    if isinstance(c, Comparison):
        return f"{_fmt_operand(c.lhs)} {c.rel} {_fmt_operand(c.rhs)}"
    if isinstance(c, BoolTerm):
        return _fmt_operand(c.operand)
    if isinstance(c, CNot):
        # render ~(x == y) as x != y for readability
        if isinstance(c.inner, Comparison) and c.inner.rel == "==":
            return f"{_fmt_operand(c.inner.lhs)} != {_fmt_operand(c.inner.rhs)}"
        return "~" + _fmt_constraint(c.inner, "not")
    if isinstance(c, CAnd):
        text = f"{_fmt_constraint(c.lhs, 'and')} && {_fmt_constraint(c.rhs, 'and')}"
        return f"({text})" if parent == "not" else text
    if isinstance(c, COr):
        text = f"{_fmt_constraint(c.lhs, 'or')} || {_fmt_constraint(c.rhs, 'or')}"
        return f"({text})" if parent in ("not", "and") else text
    raise TypeError(f"not a constraint: {c!r}")  # pragma: no cover


def _fmt_pattern(p: ArgPattern) -> str:
    if isinstance(p, Wildcard):
        return ".*"
    if isinstance(p, Variable):
        return p.name
    return _fmt_value(p.value)


def _fmt_event(e: EventConstraint) -> str:
    args = ", ".join(f"{name}={_fmt_pattern(pat)}" for name, pat in e.arg_patterns)
    prefix = f"{e.binder}:" if e.binder else ""
    return f"{prefix}{e.tool}({args})"


def _fmt_formula(f: Formula, parent: str = "or") -> str:
    if isinstance(f, Before):
        return (f"before({_fmt_event(f.trigger)}, {_fmt_constraint(f.trigger.constraint)}, "
                f"{_fmt_event(f.earlier)}, {_fmt_constraint(f.earlier.constraint)})")
    if isinstance(f, After):
        return (f"after({_fmt_event(f.trigger)}, {_fmt_constraint(f.trigger.constraint)}, "
                f"{_fmt_event(f.later)}, {_fmt_constraint(f.later.constraint)})")
    if isinstance(f, Seq):
        return (f"sequence({_fmt_event(f.first)}, {_fmt_constraint(f.first.constraint)}, "
                f"{_fmt_event(f.second)}, {_fmt_constraint(f.second.constraint)})")
    if isinstance(f, Exists):
        return f"exists({_fmt_event(f.event)}, {_fmt_constraint(f.event.constraint)})"
    if isinstance(f, Forall):
        return f"forall({_fmt_event(f.event)}, {_fmt_constraint(f.event.constraint)})"
    if isinstance(f, Not):
        return "~" + _fmt_formula(f.inner, "not")
    if isinstance(f, And):
        text = f"{_fmt_formula(f.lhs, 'and')} && {_fmt_formula(f.rhs, 'and')}"
        return f"({text})" if parent == "not" else text
    if isinstance(f, Or):
        text = f"{_fmt_formula(f.lhs, 'or')} || {_fmt_formula(f.rhs, 'or')}"
        return f"({text})" if parent in ("not", "and") else text
    raise TypeError(f"not a formula node: {f!r}")  # pragma: no cover


def format_spec(ast: SpecAst) -> str:
    """Render a specification back to concrete syntax.

    The output reparses to a structurally identical tree (round-trip
    property); it is also what the normalization CLI prints.
    """
    return _fmt_formula(ast.root)
