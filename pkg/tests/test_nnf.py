"""Negation normal form: pushing negation through connectives and the
single-event quantifier duals."""

from __future__ import annotations

import pytest

from agentc.dsl import (
    And,
    Before,
    CNot,
    Comparison,
    Constant,
    Exists,
    Forall,
    Not,
    Or,
    Variable,
    parse_spec,
    to_nnf,
)


def nnf_of(text: str):
    return to_nnf(parse_spec(text)).root


def test_double_negation_cancels():
    assert nnf_of('~~exists(open(file = f), true)') == \
        nnf_of('exists(open(file = f), true)')


def test_negation_distributes_over_conjunction():
    root = nnf_of('~(exists(a(), true) && exists(b(), true))')
    assert isinstance(root, Or)
    assert isinstance(root.lhs, Forall)
    assert isinstance(root.rhs, Forall)


def test_negation_distributes_over_disjunction():
    root = nnf_of('~(exists(a(), true) || exists(b(), true))')
    assert isinstance(root, And)


def test_quantifier_duals_negate_the_event_constraint():
    root = nnf_of('~exists(create(resource = r), r == "456")')
    assert root == Forall(parse_spec(
        'forall(create(resource = r), ~(r == "456"))').root.event)

    root = nnf_of('~forall(rm(path = p), p != "/root")')
    assert isinstance(root, Exists)
    # the inner negation cancels: ~~(p == "/root") -> p == "/root"
    assert root.event.constraint == Comparison(
        "==", Variable("p"), Constant("/root"))


def test_two_event_predicates_keep_their_negation():
    root = nnf_of('~before(read(file = a), true, open(file = b), true)')
    assert isinstance(root, Not)
    assert isinstance(root.inner, Before)

    for pred in ("after", "seq"):
        root = nnf_of(f'~{pred}(a(x = v), true, b(y = w), true)')
        assert isinstance(root, Not)


def test_nested_negations_resolve_layer_by_layer():
    root = nnf_of('~(~exists(a(), true) || exists(b(), true))')
    assert isinstance(root, And)
    assert isinstance(root.lhs, Exists)   # double negation cancelled
    assert isinstance(root.rhs, Forall)   # single negation dualized


def test_positive_formulas_are_untouched():
    for text in (
        'before(read(file = f1), true, open(file = f2), f1 == f2)',
        'exists(a(), true) && (exists(b(), true) || forall(c(), true))',
    ):
        ast = parse_spec(text)
        assert to_nnf(ast) == ast


@pytest.mark.parametrize("text", [
    '~~exists(open(file = f), true)',
    '~(exists(a(), true) && ~exists(b(), true))',
    '~forall(rm(path = p), p != "/root")',
    '~(~(exists(a(), true) || exists(b(), true)) && exists(c(), true))',
    '~seq(a(x = v), true, b(y = w), v == w)',
])
def test_nnf_is_idempotent(text):
    once = to_nnf(parse_spec(text))
    assert to_nnf(once) == once


def test_no_negation_above_connectives_after_normalization():
    def check(node):
        if isinstance(node, Not):
            # a negation may wrap only a two-event predicate
            assert type(node.inner).__name__ in ("Before", "After", "Seq")
            return
        if isinstance(node, (And, Or)):
            check(node.lhs)
            check(node.rhs)

    for text in (
        '~(exists(a(), true) && (exists(b(), true) || ~exists(c(), true)))',
        '~(before(a(), true, b(), true) || after(c(), true, d(), true))',
        '~(~seq(a(), true, b(), true) && forall(c(), true))',
    ):
        check(nnf_of(text))


def test_constraint_negation_cancels_double_not():
    root = nnf_of('~exists(open(file = f), ~(f == "a"))')
    assert isinstance(root, Forall)
    assert root.event.constraint == Comparison("==", Variable("f"), Constant("a"))
    assert not isinstance(root.event.constraint, CNot)
