"""Per-argument type checking and signature-completeness verdicts."""

from __future__ import annotations

from agentc.grammar.toolcall import CompositeValue
from agentc.grammar.typecheck import type_check_and_completeness


def test_complete_well_typed_call(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": "/tmp/x", "bytes": 10, "sync": True}, rich_catalog)
    assert result.signature_complete
    assert not result.unknown_tool
    assert result.failures() == ()
    assert result.admitted_args() == {
        "path": "/tmp/x", "bytes": 10, "sync": True}


def test_missing_required_parameter(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": "/tmp/x"}, rich_catalog)
    assert not result.signature_complete
    assert result.failures() == ()  # present args are fine, one is missing


def test_unknown_tool(rich_catalog):
    result = type_check_and_completeness("frobnicate", {}, rich_catalog)
    assert result.unknown_tool
    assert not result.signature_complete


def test_wrong_sorts_are_per_argument_failures(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": 7, "bytes": "ten", "sync": True}, rich_catalog)
    failed = {v.name for v in result.failures()}
    assert failed == {"path", "bytes"}
    assert result.admitted_args() == {"sync": True}
    assert not result.signature_complete


def test_bool_is_not_an_int(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": "p", "bytes": True, "sync": True}, rich_catalog)
    assert {v.name for v in result.failures()} == {"bytes"}


def test_int_fits_a_real_slot():
    from agentc.dsl import SORT_REAL, ToolCatalog, ToolParam, ToolSig
    catalog = ToolCatalog([ToolSig("scale", (ToolParam("by", SORT_REAL),))])
    result = type_check_and_completeness("scale", {"by": 2}, catalog)
    assert result.signature_complete and result.failures() == ()


def test_unknown_argument_name(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": "p", "bytes": 1, "sync": True, "mode": "w"},
        rich_catalog)
    assert {v.name for v in result.failures()} == {"mode"}
    assert not result.signature_complete


def test_null_is_never_admitted(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": None, "bytes": 1, "sync": True}, rich_catalog)
    assert {v.name for v in result.failures()} == {"path"}


def test_composite_admitted_into_string_slot_as_text(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": CompositeValue('["a"]'), "bytes": 1, "sync": True},
        rich_catalog)
    assert result.failures() == ()
    assert result.admitted_args()["path"] == '["a"]'


def test_composite_rejected_for_scalar_slots(rich_catalog):
    result = type_check_and_completeness(
        "write", {"path": "p", "bytes": CompositeValue("[1]"), "sync": True},
        rich_catalog)
    assert {v.name for v in result.failures()} == {"bytes"}


def test_zero_parameter_tool_is_complete_with_no_args(rich_catalog):
    result = type_check_and_completeness("ping", {}, rich_catalog)
    assert result.signature_complete and result.failures() == ()


def test_optional_parameters_do_not_block_completeness():
    from agentc.dsl import SORT_STRING, ToolCatalog, ToolParam, ToolSig
    catalog = ToolCatalog([ToolSig("greet", (
        ToolParam("who", SORT_STRING),
        ToolParam("style", SORT_STRING, required=False),
    ))])
    result = type_check_and_completeness("greet", {"who": "you"}, catalog)
    assert result.signature_complete
