"""Trace values: append/output/end discipline, state-projection maps, and
the JSON-lines serialization."""

from __future__ import annotations

import pytest

from agentc.errors import (
    ArityMismatch,
    EmptyTrace,
    OutputAlreadySet,
    SortMismatch,
    TraceEnded,
    TraceFormatError,
    UnboundProjectionArg,
    UnknownTool,
)
from agentc.trace import (
    CurriedProjections,
    ProjectionRequirement,
    StateObservation,
    Trace,
    append_event,
    build_projection_map,
    dump_trace,
    load_trace,
    record_output,
    set_end,
)
from conftest import trace_of


# --------------------------------------------------------------------------
# Construction discipline
# --------------------------------------------------------------------------


def test_append_is_persistent(file_catalog):
    empty = Trace(file_catalog)
    one = append_event(empty, "open", {"file": "a"})
    assert len(empty) == 0 and len(one) == 1
    assert one.events[0].tool == "open"
    assert one.events[0].args == (("file", "a"),)


def test_append_checks_tool_and_arguments(file_catalog):
    t = Trace(file_catalog)
    with pytest.raises(UnknownTool):
        append_event(t, "nonesuch", {})
    with pytest.raises(ArityMismatch):
        append_event(t, "open", {"path": "a"})
    with pytest.raises(SortMismatch):
        append_event(t, "open", {"file": 7})


def test_append_after_end_fails(file_catalog):
    t = set_end(Trace(file_catalog), "safe")
    with pytest.raises(TraceEnded):
        append_event(t, "open", {"file": "a"})


def test_record_output(file_catalog):
    t = append_event(Trace(file_catalog), "open", {"file": "a"})
    t = record_output(t, "ok")
    assert t.events[-1].output == "ok"
    with pytest.raises(OutputAlreadySet):
        record_output(t, "twice")
    with pytest.raises(EmptyTrace):
        record_output(Trace(file_catalog), "nothing")


def test_end_markers(file_catalog):
    t = Trace(file_catalog)
    assert not t.ended and t.end_marker() is None
    safe = set_end(t, "safe")
    assert safe.ended and safe.end == "safe"
    assert safe.end_marker() == "End_safe"
    error = set_end(t, "error")
    assert error.end_marker() == "End_error"
    # idempotent per kind, conflicting re-end rejected
    assert set_end(safe, "safe") == safe
    with pytest.raises(TraceEnded):
        set_end(safe, "error")
    with pytest.raises(ValueError):
        set_end(t, "done")


def test_event_observation_lookup(file_catalog):
    t = trace_of(file_catalog,
                 ("open", {"file": "a"},
                  (("mode", {"file": "a"}, "rw"),)))
    ev = t.events[0]
    assert ev.observation("mode", {"file": "a"}) == "rw"
    from agentc.errors import ProjectionFailure
    with pytest.raises(ProjectionFailure):
        ev.observation("mode", {"file": "b"})


# --------------------------------------------------------------------------
# State-projection map
# --------------------------------------------------------------------------


def test_projection_map_binds_projection_args_to_tool_params(build):
    spec = build('forall(open(file = f), state(mode(f)) == "rw")')
    pmap = build_projection_map(spec)
    # recipe: the projection's 'file' parameter reads the tool's 'file' argument
    assert pmap["open"] == (
        ProjectionRequirement("mode", (("file", "file"),)),)
    # tools the policy never observes state around require nothing
    assert pmap["read"] == () and pmap["close"] == ()


def test_projection_map_recipe_renames_parameters(retail_spec_map):
    pmap, spec = retail_spec_map
    reqs = {r.projection: r for r in pmap["get_order_details"]}
    assert set(reqs) == {"order_belongs_to", "exists_order"}
    # the projection's own parameter name maps onto the tool's argument name
    assert reqs["order_belongs_to"].recipe == (("order_id", "order_id"),)


def test_projection_map_requires_trigger_bound_args(build):
    spec = build('before(read(file = f), true, open(file = g),'
                 ' state(mode(g)) == "rw")')
    with pytest.raises(UnboundProjectionArg):
        build_projection_map(spec)


def test_curried_projections_observe(build):
    spec = build('forall(open(file = f), state(mode(f)) == "rw")')
    q_s = CurriedProjections(
        build_projection_map(spec),
        {"mode": lambda state, file: state.get(file, "none")},
        {"a": "rw"})
    assert q_s.observe("open", {"file": "a"}) == (
        StateObservation("mode", (("file", "a"),), "rw"),)
    assert q_s.observe("read", {"file": "a"}) == ()


def test_curried_projections_wrap_evaluator_failures(build):
    from agentc.errors import ProjectionFailure
    spec = build('forall(open(file = f), state(mode(f)) == "rw")')

    def broken(state, file):
        raise RuntimeError("backend gone")

    q_s = CurriedProjections(build_projection_map(spec), {"mode": broken}, {})
    with pytest.raises(ProjectionFailure):
        q_s.observe("open", {"file": "a"})


@pytest.fixture()
def retail_spec_map(auth_spec):
    return build_projection_map(auth_spec), auth_spec


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def test_dump_load_round_trip(file_catalog):
    t = trace_of(
        file_catalog,
        ("open", {"file": "a"}, (("mode", {"file": "a"}, "rw"),), "opened"),
        ("read", {"file": "a"}, (), "contents"),
        ("close", {"file": "a"}),
        ("END", "safe"),
    )
    assert load_trace(dump_trace(t), file_catalog) == t


def test_dump_load_round_trip_without_end(file_catalog):
    t = trace_of(file_catalog, ("open", {"file": "a"}))
    assert load_trace(dump_trace(t), file_catalog) == t
    assert load_trace("", file_catalog) == Trace(file_catalog)


def test_dump_format_is_one_json_object_per_line(file_catalog):
    import json
    t = trace_of(file_catalog, ("open", {"file": "a"}), ("END", "error"))
    lines = dump_trace(t).splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["tool"] == "open"
    assert json.loads(lines[1]) == {"end": "error"}


@pytest.mark.parametrize("bad", [
    "not json",
    "[1, 2]",
    '{"args": {}}',                                   # missing tool
    '{"tool": "open", "args": {"file": 3}}',          # bad sort
    '{"tool": "nonesuch", "args": {}}',               # unknown tool
    '{"end": "eventually"}',                          # bad end kind
    '{"end": "safe"}\n{"tool": "open", "args": {"file": "a"}}',  # end not last
])
def test_load_rejects_malformed_documents(bad, file_catalog):
    from agentc.errors import AgentcError
    with pytest.raises(AgentcError):
        load_trace(bad, file_catalog)


def test_load_reports_line_numbers(file_catalog):
    good = '{"tool": "open", "args": {"file": "a"}}'
    with pytest.raises(TraceFormatError) as exc:
        load_trace(good + "\n{broken", file_catalog)
    assert "line 2" in str(exc.value)
