"""Compilation of policies into quantified timeline formulas, plus the
ground encoding of traces and the end-marker axioms."""

from __future__ import annotations

import pytest

from agentc.dsl import (
    END_ERROR,
    END_SAFE,
    parse_spec,
    validate_spec,
)
from agentc.fol import (
    ArgOf,
    FExists,
    FForall,
    OutAt,
    Rel,
    StObs,
    TimeLit,
    ToolAt,
    ToolConst,
    declarations_for,
    encode_trace_and_axioms,
    end_axioms,
    event_facts,
    format_formula,
    is_end,
    observation_facts,
    translate_spec,
)
from agentc.trace import Trace
from conftest import AUTH_OK_STEPS, trace_of


def fol_text(build, text: str) -> str:
    return format_formula(translate_spec(build(text)))


# --------------------------------------------------------------------------
# Specification translation
# --------------------------------------------------------------------------


def test_precedence_translates_to_forall_with_earlier_exists(build):
    text = fol_text(build,
                    'before(read(file = f1), true, open(file = f2), f1 == f2)')
    assert "forall" in text and "exists" in text
    assert "read" in text and "open" in text
    # the partner is strictly earlier than the trigger
    assert "<" in text


def test_response_translates_with_later_exists(build):
    text = fol_text(build,
                    'after(open(file = f1), true, close(file = f2), f1 == f2)')
    assert "forall" in text and "exists" in text
    assert ">" in text


def test_required_occurrence_translates_to_exists(build):
    text = fol_text(build, 'exists(open(file = f), f == "a")')
    assert text.startswith("(exists") or "exists" in text
    assert "forall" not in text


def test_universal_translates_to_forall_only(build):
    text = fol_text(build, 'forall(read(file = f), f == "a")')
    assert "forall" in text and "exists" not in text


def test_time_variables_are_guarded_to_the_timeline(build):
    # every quantified time variable carries a lower bound
    text = fol_text(build, 'forall(read(file = f), true)')
    assert ">= 0" in text


def test_wildcard_pattern_constrains_nothing(build):
    with_wild = fol_text(build, 'exists(open(file = .*), true)')
    named_var = fol_text(build, 'exists(open(file = f), true)')
    # a wildcard and an unconstrained variable admit the same calls: neither
    # translation mentions a concrete argument value
    assert '"' not in with_wild and '"' not in named_var


def test_constant_pattern_becomes_argument_equality(build):
    text = fol_text(build, 'exists(open(file = "a"), true)')
    assert 'arg' in text and '"a"' in text


def test_output_reference_translates_to_output_term(retail_tools, retail_projs):
    spec = validate_spec(
        parse_spec('before(get_order_details(order_id = o), true,'
                   ' f:find_user_id_by_email(email = .*),'
                   ' output(f) != "Error: user not found")'),
        retail_tools, retail_projs)
    text = format_formula(translate_spec(spec))
    assert "outAt(" in text


def test_state_reference_translates_to_observation_term(build):
    text = fol_text(build, 'forall(open(file = f), state(mode(f)) == "rw")')
    assert "mode" in text


def test_negated_two_event_predicate_translates_negatively(build):
    pos = fol_text(build, 'seq(open(file = a), true, close(file = b), true)')
    neg = fol_text(build, '~seq(open(file = a), true, close(file = b), true)')
    assert pos != neg
    assert neg.startswith("!")


def test_string_functions_translate(build):
    text = fol_text(build, 'forall(open(file = f),'
                           ' contains(concat(f, "x"), "y") && strlen(f) > 0)')
    for fn in ("contains", "concat", "strlen"):
        assert fn in text


# --------------------------------------------------------------------------
# Ground trace encoding
# --------------------------------------------------------------------------


def test_event_facts_pin_tool_and_arguments(file_catalog):
    t = trace_of(file_catalog, ("open", {"file": "a"}, (), "done"))
    facts = event_facts(t, 0)
    assert Rel("==", ToolAt(TimeLit(0)), ToolConst("open")) in facts
    assert any(isinstance(f, Rel) and isinstance(f.lhs, ArgOf) for f in facts)
    assert any(isinstance(f, Rel) and isinstance(f.lhs, OutAt) for f in facts)


def test_event_facts_without_output_make_no_output_claim(file_catalog):
    t = trace_of(file_catalog, ("open", {"file": "a"}))
    facts = event_facts(t, 0)
    assert not any(isinstance(f, Rel) and isinstance(f.lhs, OutAt)
                   for f in facts)


def test_observation_facts_ground_projection_values(retail_tools, retail_projs):
    t = trace_of(retail_tools, *AUTH_OK_STEPS)
    facts = observation_facts(t, 1, retail_projs)
    assert len(facts) == 2
    assert all(isinstance(f, Rel) and isinstance(f.lhs, StObs) for f in facts)


def test_end_axioms_mention_both_markers():
    text = " ".join(format_formula(a) for a in end_axioms())
    assert END_SAFE in text and END_ERROR in text


def test_is_end_is_a_disjunction_over_markers():
    text = format_formula(is_end(ToolAt(TimeLit(3))))
    assert END_SAFE in text and END_ERROR in text


def ground_end_pins(facts):
    """Facts of the shape toolAt(<literal>) == End_safe/End_error."""
    return [f for f in facts
            if isinstance(f, Rel) and f.op == "=="
            and isinstance(f.lhs, ToolAt) and isinstance(f.lhs.time, TimeLit)
            and isinstance(f.rhs, ToolConst)
            and f.rhs.name in (END_SAFE, END_ERROR)]


def test_encode_open_trace_leaves_end_position_free(file_catalog):
    t = trace_of(file_catalog, ("open", {"file": "a"}))
    _, facts = encode_trace_and_axioms(build_spec_over(file_catalog), t)
    text = " ".join(format_formula(f) for f in facts)
    assert "open" in text
    # an open trace pins no end marker at a concrete position
    assert ground_end_pins(facts) == []


def test_encode_closed_trace_pins_the_end_marker(file_catalog):
    t = trace_of(file_catalog, ("open", {"file": "a"}), ("END", "safe"))
    _, facts = encode_trace_and_axioms(build_spec_over(file_catalog), t)
    pins = ground_end_pins(facts)
    assert len(pins) == 1
    assert pins[0].lhs.time == TimeLit(1)
    assert pins[0].rhs == ToolConst(END_SAFE)


def build_spec_over(catalog):
    from agentc.harness.templates import _NO_PROJECTIONS
    return validate_spec(parse_spec('exists(open(file = f), true)'),
                         catalog, _NO_PROJECTIONS)


def test_declarations_include_end_markers_and_catalog_tools(
        file_catalog, file_projections):
    decls = declarations_for(file_catalog, file_projections)
    assert END_SAFE in decls.tools and END_ERROR in decls.tools
    for tool in ("open", "read", "close", "emit_error"):
        assert tool in decls.tools


def test_formula_formatting_is_deterministic(build):
    spec = build('before(read(file = f1), true, open(file = f2), f1 == f2)')
    assert format_formula(translate_spec(spec)) == \
        format_formula(translate_spec(spec))
