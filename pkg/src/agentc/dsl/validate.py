"""Validation: resolve a parsed specification against tool and projection
catalogs, normalize it, and enforce the placement rules for state/output
observations.

The result is the only representation downstream modules accept; it pins
the normalized tree, every referenced symbol, and a global variable-sort
assignment (first binding wins; an int-sorted variable may flow into real
positions, nothing else coerces).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .ast import (
    After,
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
    OutputRef,
    Seq,
    SpecAst,
    StateRef,
    Variable,
    Wildcard,
    SORT_BOOL,
    SORT_INT,
    SORT_REAL,
    SORT_STRING,
)
from .catalog import ProjectionCatalog, ToolCatalog
from .nnf import to_nnf
from ..errors import (
    ArityMismatch,
    DuplicateBinding,
    IllegalOutputPosition,
    IllegalStateOrOutputInNnf,
    SortMismatch,
    UnboundOutputRef,
    UnboundVariable,
)

_NUMERIC = (SORT_INT, SORT_REAL)


@dataclass(frozen=True)
class ValidatedSpec:
    """A normalized, fully resolved specification.

    `ast` is in negation normal form.  The catalogs used for resolution ride
    along so translation and interpretation need no extra context.
    """

    ast: SpecAst
    tool_refs: frozenset[str]
    projection_refs: frozenset[str]
    variable_sorts: Mapping[str, str]
    catalog: ToolCatalog
    projections: ProjectionCatalog


class _Validator:
    def __init__(self, catalog: ToolCatalog, projections: ProjectionCatalog):
        self.catalog = catalog
        self.projections = projections
        self.tool_refs: set[str] = set()
        self.projection_refs: set[str] = set()
        self.var_sorts: dict[str, str] = {}
        self.binders: dict[str, EventConstraint] = {}

    # ------------------------------------------------------------- sorting

    def bind_var(self, name: str, sort: str) -> None:
        existing = self.var_sorts.get(name)
        if existing is None:
            self.var_sorts[name] = sort
        elif existing != sort and not (existing == SORT_INT and sort == SORT_REAL):
            raise SortMismatch(
                f"variable {name!r} first used at sort {existing}, later at {sort}")

    @staticmethod
    def constant_fits(value_sort: str, slot_sort: str) -> bool:
        return value_sort == slot_sort or (value_sort == SORT_INT and slot_sort == SORT_REAL)

    # --------------------------------------------------- pass 1: structure

    def collect_events(self, f: Formula) -> None:
        if isinstance(f, Not):
            self.collect_events(f.inner)
        elif isinstance(f, (Before, After, Seq)):
            pair = ((f.trigger, f.earlier) if isinstance(f, Before)
                    else (f.trigger, f.later) if isinstance(f, After)
                    else (f.first, f.second))
            for evc in pair:
                self.check_event(evc)
        elif isinstance(f, (Exists, Forall)):
            self.check_event(f.event)
        else:  # And / Or
            self.collect_events(f.lhs)
            self.collect_events(f.rhs)

    def check_event(self, evc: EventConstraint) -> None:
        sig = self.catalog.get(evc.tool)  # raises UnknownTool
        self.tool_refs.add(evc.tool)
        seen: set[str] = set()
        for pname, pat in evc.arg_patterns:
            if not sig.has_param(pname):
                raise ArityMismatch(
                    f"tool {evc.tool!r} has no parameter {pname!r}")
            if pname in seen:
                raise ArityMismatch(
                    f"parameter {pname!r} bound twice in event {evc.tool!r}")
            seen.add(pname)
            psort = sig.param(pname).sort
            if isinstance(pat, Variable):
                self.bind_var(pat.name, psort)
            elif isinstance(pat, Constant):
                if not self.constant_fits(pat.sort, psort):
                    raise SortMismatch(
                        f"constant pattern {pat.value!r} has sort {pat.sort}, "
                        f"parameter {evc.tool}.{pname} expects {psort}")
            # Wildcard: matches anything
        if evc.binder is not None:
            if evc.binder in self.binders:
                raise DuplicateBinding(f"binder {evc.binder!r} bound twice")
            self.binders[evc.binder] = evc

    # -------------------------------------------------- pass 2: constraints

    def check_formula(self, f: Formula, negated: bool = False) -> None:
        if isinstance(f, Not):
            self.check_formula(f.inner, not negated)
        elif isinstance(f, Before):
            restricted = negated  # state/output cannot look forward
            trig_vars = set(f.trigger.pattern_vars())
            both = trig_vars | set(f.earlier.pattern_vars())
            self.check_constraint(f.trigger.constraint, trig_vars, f, "first",
                                  restricted)
            self.check_constraint(f.earlier.constraint, both, f, "second",
                                  restricted)
        elif isinstance(f, After):
            trig_vars = set(f.trigger.pattern_vars())
            both = trig_vars | set(f.later.pattern_vars())
            self.check_constraint(f.trigger.constraint, trig_vars, f, "first", False)
            self.check_constraint(f.later.constraint, both, f, "second", False)
        elif isinstance(f, Seq):
            first_vars = set(f.first.pattern_vars())
            both = first_vars | set(f.second.pattern_vars())
            self.check_constraint(f.first.constraint, first_vars, f, "first", True)
            self.check_constraint(f.second.constraint, both, f, "second", True)
        elif isinstance(f, (Exists, Forall)):
            self.check_constraint(f.event.constraint,
                                  set(f.event.pattern_vars()), f, "only", False)
        else:  # And / Or
            self.check_formula(f.lhs, negated)
            self.check_formula(f.rhs, negated)

    def check_constraint(self, c: Constraint, in_scope: set[str],
                         node: Formula, slot: str, restricted: bool) -> None:
        """Validate one constraint slot.

        `restricted` marks positions that cannot observe state or past
        outputs (sequence predicates and negated precedence predicates).
        """
        if isinstance(c, Comparison):
            ls = self.operand_sort(c.lhs, in_scope, node, slot, restricted)
            rs = self.operand_sort(c.rhs, in_scope, node, slot, restricted)
            if c.rel == "==":
                if not self.sorts_comparable(ls, rs):
                    raise SortMismatch(
                        f"cannot compare {ls} with {rs} in {self.describe(node)}")
            else:
                if ls not in _NUMERIC or rs not in _NUMERIC:
                    raise SortMismatch(
                        f"order relation {c.rel!r} needs numeric operands, "
                        f"got {ls} and {rs}")
        elif isinstance(c, BoolTerm):
            sort = self.operand_sort(c.operand, in_scope, node, slot, restricted)
            if sort != SORT_BOOL:
                raise SortMismatch(
                    f"bare term used as a condition must be bool, got {sort}")
        elif isinstance(c, CNot):
            self.check_constraint(c.inner, in_scope, node, slot, restricted)
        elif isinstance(c, (CAnd, COr)):
            self.check_constraint(c.lhs, in_scope, node, slot, restricted)
            self.check_constraint(c.rhs, in_scope, node, slot, restricted)
        else:  # pragma: no cover
            raise TypeError(f"not a constraint node: {c!r}")

    @staticmethod
    def sorts_comparable(a: str, b: str) -> bool:
        if a == b:
            return True
        return {a, b} == {SORT_INT, SORT_REAL}

    @staticmethod
    def describe(node: Formula) -> str:
        return type(node).__name__.lower() + " predicate"

    def operand_sort(self, op: Operand, in_scope: set[str],
                     node: Formula, slot: str, restricted: bool) -> str:
        if isinstance(op, Constant):
            return op.sort
        if isinstance(op, Variable):
            if op.name not in in_scope:
                raise UnboundVariable(
                    f"variable {op.name!r} is not bound by an argument pattern "
                    f"in scope of this constraint")
            return self.var_sorts[op.name]
        if isinstance(op, OutputRef):
            if restricted:
                raise IllegalStateOrOutputInNnf(
                    f"output({op.binder}) cannot appear in a forward-looking "
                    f"position ({self.describe(node)})")
            if op.binder not in self.binders:
                raise UnboundOutputRef(f"output({op.binder}) has no matching binder")
            if not (isinstance(node, Before) and slot == "second"
                    and node.earlier.binder == op.binder):
                raise IllegalOutputPosition(
                    f"output({op.binder}) may only appear in the second "
                    f"constraint of the precedence predicate that binds it")
            return SORT_STRING
        if isinstance(op, StateRef):
            if restricted:
                raise IllegalStateOrOutputInNnf(
                    f"state({op.projection}(...)) cannot appear in a "
                    f"forward-looking position ({self.describe(node)})")
            sig = self.projections.get(op.projection)  # raises UnknownProjection
            self.projection_refs.add(op.projection)
            if len(op.args) != len(sig.params):
                raise ArityMismatch(
                    f"projection {op.projection!r} takes {len(sig.params)} "
                    f"argument(s), got {len(op.args)}")
            for var_name, param in zip(op.args, sig.params):
                if var_name not in in_scope:
                    raise UnboundVariable(
                        f"projection argument {var_name!r} is not bound by an "
                        f"argument pattern in scope")
                self.bind_var(var_name, param.sort)
            return sig.return_sort
        if isinstance(op, FunctionApp):
            return self.function_sort(op, in_scope, node, slot, restricted)
        raise TypeError(f"not an operand: {op!r}")  # pragma: no cover

    def function_sort(self, op: FunctionApp, in_scope: set[str],
                      node: Formula, slot: str, restricted: bool) -> str:
        arg_sorts = [self.operand_sort(a, in_scope, node, slot, restricted)
                     for a in op.args]
        if op.fn in ("+", "*"):
            if len(arg_sorts) < 2:
                raise ArityMismatch(f"{op.fn!r} needs at least two arguments")
            if any(s not in _NUMERIC for s in arg_sorts):
                raise SortMismatch(f"{op.fn!r} needs numeric arguments, got {arg_sorts}")
            return SORT_REAL if SORT_REAL in arg_sorts else SORT_INT
        if op.fn == "strlen":
            if len(arg_sorts) != 1:
                raise ArityMismatch("strlen takes exactly one argument")
            if arg_sorts[0] != SORT_STRING:
                raise SortMismatch(f"strlen needs a string, got {arg_sorts[0]}")
            return SORT_INT
        if op.fn == "concat":
            if len(arg_sorts) != 2:
                raise ArityMismatch("concat takes exactly two arguments")
            if arg_sorts != [SORT_STRING, SORT_STRING]:
                raise SortMismatch(f"concat needs two strings, got {arg_sorts}")
            return SORT_STRING
        if op.fn == "contains":
            if len(arg_sorts) != 2:
                raise ArityMismatch("contains takes exactly two arguments")
            if arg_sorts != [SORT_STRING, SORT_STRING]:
                raise SortMismatch(f"contains needs two strings, got {arg_sorts}")
            return SORT_BOOL
        raise SortMismatch(f"unknown function {op.fn!r}")  # pragma: no cover


def validate_spec(ast: SpecAst, catalog: ToolCatalog,
                  projections: ProjectionCatalog) -> ValidatedSpec:
    """Resolve and normalize a parsed specification.

    Raises a ValidationError subclass describing the first problem found.
    """
    normalized = to_nnf(ast)
    v = _Validator(catalog, projections)
    v.collect_events(normalized.root)
    v.check_formula(normalized.root)
    return ValidatedSpec(
        ast=normalized,
        tool_refs=frozenset(v.tool_refs),
        projection_refs=frozenset(v.projection_refs),
        variable_sorts=dict(v.var_sorts),
        catalog=catalog,
        projections=projections,
    )
