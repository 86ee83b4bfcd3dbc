"""The brute-force semantic checker: direct word evaluation and
bounded-extension compliance.  Expected verdicts here are frozen from
hand-worked evaluations of each policy over each word."""

from __future__ import annotations

import pytest

from agentc.dsl import (
    SORT_STRING,
    ToolCatalog,
    ToolParam,
    ToolSig,
    parse_spec,
    validate_spec,
)
from agentc.errors import DomainTooLarge
from agentc.harness import (
    OutputUnavailable,
    extension_letters,
    interpret_compliance_oracle,
    satisfies_word,
)
from agentc.harness.templates import _NO_PROJECTIONS
from agentc.trace import Trace, set_end
from conftest import (
    AUTH_BARE_STEPS,
    AUTH_OK_STEPS,
    AUTH_WRONG_USER_STEPS,
    REFUND_DIVERTED_STEPS,
    REFUND_GIFT_CARD_STEPS,
    REFUND_OK_STEPS,
    trace_of,
)


def catalog_of(*names: str) -> ToolCatalog:
    return ToolCatalog([
        ToolSig(n, (ToolParam("x", SORT_STRING),)) for n in names])


def spec_over(text: str, catalog: ToolCatalog):
    return validate_spec(parse_spec(text), catalog, _NO_PROJECTIONS)


FILES = catalog_of("open", "read", "close")
RESOURCES = catalog_of("create", "use", "dispose")

READ_NEEDS_OPEN = spec_over(
    'before(read(x = f1), true, open(x = f2), f1 == f2)', FILES)
OPEN_NEEDS_CLOSE = spec_over(
    'after(open(x = f1), true, close(x = f2), f1 == f2)', FILES)
USE_THEN_DISPOSE = spec_over(
    'seq(use(x = r1), r1 == "123", dispose(x = r2), r1 == r2)', RESOURCES)
NEVER_RM_ROOT = spec_over(
    'forall(rm(x = p), ~(p == "/root"))', catalog_of("rm", "ls"))
MUST_CREATE = spec_over(
    'exists(create(x = rid), rid == "456")', RESOURCES)


def word(catalog, *steps):
    return trace_of(catalog, *steps).events


# --------------------------------------------------------------------------
# Direct word evaluation
# --------------------------------------------------------------------------


@pytest.mark.parametrize("spec,steps,expected", [
    # precedence: every read needs an earlier open of the same file
    (READ_NEEDS_OPEN, (), True),
    (READ_NEEDS_OPEN, (("open", {"x": "a"}), ("read", {"x": "a"})), True),
    (READ_NEEDS_OPEN, (("read", {"x": "a"}),), False),
    (READ_NEEDS_OPEN, (("open", {"x": "b"}), ("read", {"x": "a"})), False),
    (READ_NEEDS_OPEN, (("read", {"x": "a"}), ("open", {"x": "a"})), False),
    # response: every open is eventually closed
    (OPEN_NEEDS_CLOSE, (), True),
    (OPEN_NEEDS_CLOSE, (("open", {"x": "a"}), ("close", {"x": "a"})), True),
    (OPEN_NEEDS_CLOSE, (("open", {"x": "a"}),), False),
    (OPEN_NEEDS_CLOSE, (("open", {"x": "a"}), ("close", {"x": "b"})), False),
    (OPEN_NEEDS_CLOSE, (("close", {"x": "a"}),), True),
    # ordered occurrence: use of "123" then a matching dispose must occur
    (USE_THEN_DISPOSE, (), False),
    (USE_THEN_DISPOSE,
     (("use", {"x": "123"}), ("dispose", {"x": "123"})), True),
    (USE_THEN_DISPOSE,
     (("dispose", {"x": "123"}), ("use", {"x": "123"})), False),
    (USE_THEN_DISPOSE,
     (("use", {"x": "123"}), ("dispose", {"x": "456"})), False),
    # universal ban
    (NEVER_RM_ROOT, (), True),
    (NEVER_RM_ROOT, (("rm", {"x": "/tmp"}),), True),
    (NEVER_RM_ROOT, (("rm", {"x": "/root"}),), False),
    # required occurrence
    (MUST_CREATE, (), False),
    (MUST_CREATE, (("create", {"x": "456"}),), True),
    (MUST_CREATE, (("create", {"x": "123"}),), False),
])
def test_word_satisfaction(spec, steps, expected):
    assert satisfies_word(spec, word(spec.catalog, *steps)) is expected


def test_word_satisfaction_conjunction_and_negation():
    both = spec_over(
        'exists(create(x = r), r == "456") && forall(rm(x = p), true)',
        catalog_of("create", "rm"))
    assert satisfies_word(both, word(both.catalog, ("create", {"x": "456"})))
    assert not satisfies_word(both, word(both.catalog))

    banned = spec_over('~exists(use(x = r), r == "123")', RESOURCES)
    assert satisfies_word(banned, word(RESOURCES, ("use", {"x": "456"})))
    assert not satisfies_word(banned, word(RESOURCES, ("use", {"x": "123"})))


def test_word_satisfaction_wildcard_matches_any_value():
    any_use = spec_over('exists(use(x = .*), true)', RESOURCES)
    assert satisfies_word(any_use, word(RESOURCES, ("use", {"x": "999"})))
    assert not satisfies_word(any_use, word(RESOURCES, ("create", {"x": "1"})))


def test_word_satisfaction_reads_recorded_outputs(auth_spec, retail_tools):
    ok = trace_of(retail_tools, *AUTH_OK_STEPS)
    assert satisfies_word(auth_spec, ok.events)
    bare = trace_of(retail_tools, *AUTH_BARE_STEPS)
    assert not satisfies_word(auth_spec, bare.events)
    wrong = trace_of(retail_tools, *AUTH_WRONG_USER_STEPS)
    assert not satisfies_word(auth_spec, wrong.events)


def test_word_satisfaction_refund_policy(refund_spec, retail_tools):
    assert satisfies_word(refund_spec,
                          trace_of(retail_tools, *REFUND_OK_STEPS).events)
    assert satisfies_word(
        refund_spec, trace_of(retail_tools, *REFUND_GIFT_CARD_STEPS).events)
    assert not satisfies_word(
        refund_spec, trace_of(retail_tools, *REFUND_DIVERTED_STEPS).events)


def test_missing_output_is_an_explicit_failure(auth_spec, retail_tools):
    no_output = trace_of(
        retail_tools,
        ("find_user_id_by_email", {"email": "mia.garcia2723@example.com"}),
        AUTH_OK_STEPS[1])
    with pytest.raises(OutputUnavailable):
        satisfies_word(auth_spec, no_output.events)


# --------------------------------------------------------------------------
# Extension alphabet
# --------------------------------------------------------------------------


def test_extension_letters_cover_spec_tools_only():
    letters = extension_letters(READ_NEEDS_OPEN, ["a", "b"])
    tools = {t for t, _ in letters}
    assert tools == {"open", "read"}  # 'close' is never mentioned
    assert ("open", {"x": "a"}) in letters and ("read", {"x": "b"}) in letters
    assert len(letters) == 4


def test_extension_letters_respect_sorts():
    letters = extension_letters(READ_NEEDS_OPEN, ["a", 7, True])
    assert all(isinstance(args["x"], str) for _, args in letters)


# --------------------------------------------------------------------------
# Bounded-extension compliance
# --------------------------------------------------------------------------

DOMAIN = ("a", "b")
RDOMAIN = ("123", "456")


def oracle(spec, trace, bound, domain):
    return interpret_compliance_oracle(spec, trace, bound, domain)


def test_violated_precedence_cannot_be_repaired():
    t = trace_of(FILES, ("read", {"x": "a"}))
    for bound in (0, 1, 2, 3):
        assert oracle(READ_NEEDS_OPEN, t, bound, DOMAIN) is False


def test_open_obligation_needs_one_more_event():
    t = trace_of(FILES, ("open", {"x": "a"}))
    assert oracle(OPEN_NEEDS_CLOSE, t, 0, DOMAIN) is False
    assert oracle(OPEN_NEEDS_CLOSE, t, 1, DOMAIN) is True


def test_two_pending_obligations_need_two_events():
    t = trace_of(FILES, ("open", {"x": "a"}), ("open", {"x": "b"}))
    assert oracle(OPEN_NEEDS_CLOSE, t, 1, DOMAIN) is False
    assert oracle(OPEN_NEEDS_CLOSE, t, 2, DOMAIN) is True


def test_required_sequence_needs_both_events():
    t = Trace(RESOURCES)
    assert oracle(USE_THEN_DISPOSE, t, 1, RDOMAIN) is False
    assert oracle(USE_THEN_DISPOSE, t, 2, RDOMAIN) is True
    started = trace_of(RESOURCES, ("use", {"x": "123"}))
    assert oracle(USE_THEN_DISPOSE, started, 1, RDOMAIN) is True


def test_ended_trace_is_judged_as_is():
    pending = trace_of(FILES, ("open", {"x": "a"}), ("END", "safe"))
    assert oracle(OPEN_NEEDS_CLOSE, pending, 4, DOMAIN) is False
    done = trace_of(FILES, ("open", {"x": "a"}), ("close", {"x": "a"}),
                    ("END", "safe"))
    assert oracle(OPEN_NEEDS_CLOSE, done, 0, DOMAIN) is True


def test_universal_ban_verdict_is_immediate():
    banned = trace_of(NEVER_RM_ROOT.catalog, ("rm", {"x": "/root"}))
    assert oracle(NEVER_RM_ROOT, banned, 4, ("/root", "/tmp")) is False
    fine = trace_of(NEVER_RM_ROOT.catalog, ("rm", {"x": "/tmp"}))
    assert oracle(NEVER_RM_ROOT, fine, 0, ("/root", "/tmp")) is True


def test_noncompliance_is_monotone_under_extension():
    """One-step extensions of an unrepairable trace stay unrepairable."""
    t = trace_of(FILES, ("read", {"x": "a"}))
    assert oracle(READ_NEEDS_OPEN, t, 4, DOMAIN) is False
    for letter_tool, letter_args in extension_letters(READ_NEEDS_OPEN, DOMAIN):
        from agentc.trace import append_event
        extended = append_event(t, letter_tool, letter_args)
        assert oracle(READ_NEEDS_OPEN, extended, 4, DOMAIN) is False


def test_negative_bound_rejected():
    with pytest.raises(ValueError):
        oracle(MUST_CREATE, Trace(RESOURCES), -1, RDOMAIN)


def test_enumeration_cap_guards_blowup():
    with pytest.raises(DomainTooLarge):
        interpret_compliance_oracle(
            MUST_CREATE, Trace(RESOURCES), 4,
            [str(i) for i in range(40)], cap=100)


def test_output_fn_supplies_hypothetical_outputs(auth_spec, retail_tools):
    """With an output rule for extension events, an unauthenticated lookup
    becomes repairable only when authentication could still come first —
    which precedence forbids, so it stays unrepairable."""
    bare = trace_of(retail_tools, *AUTH_BARE_STEPS)
    verdict = interpret_compliance_oracle(
        auth_spec, bare, 2, ["mia.garcia2723@example.com", "#W5490111"],
        output_fn=lambda tool, args: "mia_garcia_4516")
    assert verdict is False
