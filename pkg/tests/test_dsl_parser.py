"""Surface-syntax parsing: shapes, literals, precedence, aliases, errors,
and pretty-printer round trips."""

from __future__ import annotations

import pytest

from agentc.dsl import (
    After,
    And,
    Before,
    BoolTerm,
    CAnd,
    CNot,
    COr,
    Comparison,
    Constant,
    EventConstraint,
    Exists,
    Forall,
    FunctionApp,
    Not,
    Or,
    OutputRef,
    Seq,
    StateRef,
    TRUE,
    Variable,
    WILDCARD,
    format_spec,
    parse_spec,
)
from agentc.errors import DslSyntaxError

ROUND_TRIP_CORPUS = [
    'before(read(file = f1), true, open(file = f2), f1 == f2)',
    'after(open(file = f1), true, close(file = f2), f1 == f2)',
    'seq(use(resource = r1), r1 == "123", dispose(resource = r2), r1 == r2)',
    'forall(rm(path = p), p != "/root")',
    'exists(create(resource = rid), rid == "456")',
    'forall(write(path = p, bytes = n, sync = s), n >= 0 && s == true)',
    'exists(ping(), true)',
    '~exists(rm(path = .*), true)',
    'exists(open(file = "a"), true) && forall(read(file = f), f == "a")',
    'exists(open(file = .*), true) || ~exists(close(file = .*), true)',
    'before(get_order_details(order_id = oid), true,'
    ' f:find_user_id_by_email(email = .*),'
    ' output(f) != "Error" && state(order_belongs_to(oid)) == output(f))',
    'forall(pay(method = m), state(same(m)) == true || contains(m, "gift"))',
    '(exists(a(), true) || exists(b(), true)) && exists(c(), true)',
]


# --------------------------------------------------------------------------
# Shapes
# --------------------------------------------------------------------------


def test_before_four_slot_form():
    ast = parse_spec(
        'before(read(file = f), true, open(file = g), f == g)')
    root = ast.root
    assert isinstance(root, Before)
    assert root.trigger == EventConstraint(
        "read", (("file", Variable("f")),), TRUE)
    assert root.earlier == EventConstraint(
        "open", (("file", Variable("g")),),
        Comparison("==", Variable("f"), Variable("g")))


def test_after_and_seq_forms():
    after = parse_spec(
        'after(open(file = f), true, close(file = g), f == g)').root
    assert isinstance(after, After)
    assert after.trigger.tool == "open"
    assert after.later.tool == "close"

    seq = parse_spec(
        'seq(use(resource = r), r == "1", dispose(resource = s), r == s)').root
    assert isinstance(seq, Seq)
    assert seq.first.tool == "use"
    assert seq.first.constraint == Comparison("==", Variable("r"), Constant("1"))
    assert seq.second.tool == "dispose"
    assert seq.second.constraint == Comparison("==", Variable("r"), Variable("s"))


def test_sequence_keyword_is_an_alias_for_seq():
    a = parse_spec('seq(a(), true, b(), true)')
    b = parse_spec('sequence(a(), true, b(), true)')
    assert a == b


def test_quantifier_forms():
    forall = parse_spec('forall(rm(path = p), p != "/root")').root
    assert isinstance(forall, Forall)
    # != is surface syntax for a negated equality
    assert forall.event.constraint == CNot(
        Comparison("==", Variable("p"), Constant("/root")))

    exists = parse_spec('exists(create(resource = r), r == "456")').root
    assert isinstance(exists, Exists)

    bare = parse_spec('exists(ping(), true)').root
    assert isinstance(bare, Exists)
    assert bare.event.constraint == TRUE
    assert bare.event.arg_patterns == ()


def test_quantifier_constraint_slot_is_mandatory():
    with pytest.raises(DslSyntaxError):
        parse_spec('forall(rm(path = p))')


# --------------------------------------------------------------------------
# Patterns, operands, literals
# --------------------------------------------------------------------------


def test_argument_patterns_variable_constant_wildcard():
    evc = parse_spec(
        'exists(write(path = "/tmp/x", bytes = n, sync = .*), true)').root.event
    assert evc.arg_patterns == (
        ("path", Constant("/tmp/x")),
        ("bytes", Variable("n")),
        ("sync", WILDCARD),
    )


def test_literal_kinds():
    evc = parse_spec(
        'exists(w(a = 3, b = -2, c = 1.5, d = true, e = false, f = "s"), true)'
    ).root.event
    values = [p for _, p in evc.arg_patterns]
    assert values == [Constant(3), Constant(-2), Constant(1.5),
                      Constant(True), Constant(False), Constant("s")]
    # bool constants are bool, not int (bool subclasses int in Python)
    assert values[3].sort == "bool" and values[0].sort == "int"


def test_binder_output_and_state_references():
    root = parse_spec(
        'before(get(order = o), true, f:find(email = .*),'
        ' output(f) == state(owner(o)))').root
    assert root.earlier.binder == "f"
    cmp = root.earlier.constraint
    assert cmp == Comparison("==", OutputRef("f"), StateRef("owner", ("o",)))


def test_function_application_operand():
    root = parse_spec('forall(pay(m = m), contains(m, "gift_card"))').root
    assert root.event.constraint == BoolTerm(
        FunctionApp("contains", (Variable("m"), Constant("gift_card"))))


def test_relation_operators():
    for rel in ("==", "<", "<=", ">", ">="):
        root = parse_spec(f'forall(w(n = n), n {rel} 3)').root
        assert root.event.constraint == Comparison(rel, Variable("n"), Constant(3))


# --------------------------------------------------------------------------
# Formula connectives and precedence
# --------------------------------------------------------------------------


def test_conjunction_binds_tighter_than_disjunction():
    root = parse_spec(
        'exists(a(), true) || exists(b(), true) && exists(c(), true)').root
    assert isinstance(root, Or)
    assert isinstance(root.rhs, And)


def test_parentheses_override_precedence():
    root = parse_spec(
        '(exists(a(), true) || exists(b(), true)) && exists(c(), true)').root
    assert isinstance(root, And)
    assert isinstance(root.lhs, Or)


def test_formula_negation():
    root = parse_spec('~exists(rm(path = .*), true)').root
    assert isinstance(root, Not)
    assert isinstance(root.inner, Exists)

    root = parse_spec('~(exists(a(), true) && exists(b(), true))').root
    assert isinstance(root, Not)
    assert isinstance(root.inner, And)


def test_constraint_connectives_and_negation():
    root = parse_spec('forall(w(n = n), ~(n == 1) && (n < 5 || n > 9))').root
    c = root.event.constraint
    assert isinstance(c, CAnd)
    assert c.lhs == CNot(Comparison("==", Variable("n"), Constant(1)))
    assert isinstance(c.rhs, COr)


def test_keywords_are_case_insensitive():
    lower = parse_spec('before(r(f = f), true, o(g = g), f == g)')
    mixed = parse_spec('Before(r(f = f), True, o(g = g), f == g)')
    upper = parse_spec('FORALL(rm(p = p), p != "/root")')
    assert lower == mixed
    assert isinstance(upper.root, Forall)


def test_whitespace_and_newlines_are_insignificant():
    compact = parse_spec('exists(open(file="a"),true)')
    spread = parse_spec('exists (\n  open (\n    file = "a"\n  ),\n  true\n)')
    assert compact == spread


# --------------------------------------------------------------------------
# Errors
# --------------------------------------------------------------------------


@pytest.mark.parametrize("bad", [
    "",                                         # empty input
    "exists(open(file = ))",                    # missing pattern
    "exists(open(file))",                       # missing '='
    "exists(open(file = a)",                    # unbalanced parens
    "exists(open(file = a)))",                  # trailing tokens
    "frobnicate(open(file = a))",               # unknown predicate keyword
    'forall(w(n = n), n = 3)',                  # '=' is not a relation
    'forall(w(n = n), n == )',                  # missing rhs operand
    "exists(open(file = a), true) &&",          # dangling connective
    "before(a(), true, b())",                   # arity-3 predicate form
    'exists(open(file = "unterminated))',       # unterminated string
    "exists(open(file = @))",                   # illegal character
    "output(f) == 1",                           # constraint at formula level
])
def test_syntax_errors_raise(bad):
    with pytest.raises(DslSyntaxError):
        parse_spec(bad)


def test_syntax_error_reports_position():
    with pytest.raises(DslSyntaxError) as exc:
        parse_spec("exists(open(file = @))")
    assert "@" in str(exc.value) or "position" in str(exc.value).lower()


# --------------------------------------------------------------------------
# Pretty-printer round trip
# --------------------------------------------------------------------------


@pytest.mark.parametrize("text", ROUND_TRIP_CORPUS)
def test_format_round_trip(text):
    ast = parse_spec(text)
    printed = format_spec(ast)
    assert parse_spec(printed) == ast


def test_format_is_canonical_fixed_point():
    for text in ROUND_TRIP_CORPUS:
        printed = format_spec(parse_spec(text))
        assert format_spec(parse_spec(printed)) == printed


def test_format_normalizes_keyword_case_and_aliases():
    printed = format_spec(parse_spec('SEQ(a(), True, b(), True)'))
    assert printed.startswith("sequence(")  # canonical keyword, lowercase
    assert "True" not in printed            # canonical booleans are lowercase
