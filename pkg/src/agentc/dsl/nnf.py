"""Negation normal form for specification trees.

Negation is pushed through boolean connectives and through the two
single-event quantifier predicates (which are duals of each other).  The
two-event predicates have no duals: a negation stops there and stays as a
negated predicate node.  The transformation is idempotent.
"""

from __future__ import annotations

from dataclasses import replace

from .ast import (
    And,
    After,
    Before,
    CNot,
    Constraint,
    EventConstraint,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    Seq,
    SpecAst,
)


def _negate_constraint(c: Constraint) -> Constraint:
    if isinstance(c, CNot):
        return c.inner
    return CNot(c)


def _negate_event(evc: EventConstraint) -> EventConstraint:
    return replace(evc, constraint=_negate_constraint(evc.constraint))


def _nnf(f: Formula, negated: bool) -> Formula:
    if isinstance(f, Not):
        return _nnf(f.inner, not negated)
    if isinstance(f, And):
        lhs, rhs = _nnf(f.lhs, negated), _nnf(f.rhs, negated)
        return Or(lhs, rhs) if negated else And(lhs, rhs)
    if isinstance(f, Or):
        lhs, rhs = _nnf(f.lhs, negated), _nnf(f.rhs, negated)
        return And(lhs, rhs) if negated else Or(lhs, rhs)
    if isinstance(f, Forall):
        return Exists(_negate_event(f.event)) if negated else f
    if isinstance(f, Exists):
        return Forall(_negate_event(f.event)) if negated else f
    if isinstance(f, (Before, After, Seq)):
        # no temporal dual exists; keep the negation on the node
        return Not(f) if negated else f
    raise TypeError(f"not a formula node: {f!r}")  # pragma: no cover


def to_nnf(ast: SpecAst) -> SpecAst:
    """Normalize: negations land only on two-event predicate nodes or inside
    event constraints; double negations cancel."""
    return SpecAst(_nnf(ast.root, False))
