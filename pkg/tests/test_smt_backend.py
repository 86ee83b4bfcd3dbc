"""Solver sessions: satisfiability answers, the assertion stack, timeouts,
backend selection, and the portable SMT-LIB 2 rendering."""

from __future__ import annotations

import pytest

from agentc.dsl import (
    SORT_STRING,
    ToolCatalog,
    ToolParam,
    ToolSig,
    ProjectionCatalog,
)
from agentc.errors import BackendUnavailable, SolverError
from agentc.fol import (
    FExists,
    FNot,
    Rel,
    TimeLit,
    TimeVar,
    ToolAt,
    ToolConst,
    declarations_for,
)
from agentc.smt.session import SMT_CMD_ENV, open_session
from agentc.smt.smtlib import script


@pytest.fixture(scope="module")
def decls():
    catalog = ToolCatalog([
        ToolSig("open", (ToolParam("file", SORT_STRING),)),
        ToolSig("close", (ToolParam("file", SORT_STRING),)),
    ])
    return declarations_for(catalog, ProjectionCatalog())


def tool_is(i: int, name: str):
    return Rel("==", ToolAt(TimeLit(i)), ToolConst(name))


# --------------------------------------------------------------------------
# Basic answers
# --------------------------------------------------------------------------


def test_satisfiable_ground_facts(decls):
    with open_session(decls, 5000, backend="z3") as s:
        s.push_assert([tool_is(0, "open")])
        assert s.check_sat().is_sat


def test_contradiction_is_unsat(decls):
    with open_session(decls, 5000, backend="z3") as s:
        s.push_assert([tool_is(0, "open"), tool_is(0, "close")])
        assert s.check_sat().is_unsat


def test_quantified_assertion(decls):
    t = TimeVar("t")
    somewhere_open = FExists(t, Rel("==", ToolAt(t), ToolConst("open")))
    with open_session(decls, 5000, backend="z3") as s:
        s.push_assert([somewhere_open])
        assert s.check_sat().is_sat
        s.push_assert([FNot(somewhere_open)])
        assert s.check_sat().is_unsat


# --------------------------------------------------------------------------
# Assertion stack
# --------------------------------------------------------------------------


def test_pop_restores_previous_state(decls):
    with open_session(decls, 5000, backend="z3") as s:
        s.push_assert([tool_is(0, "open")])
        frame = s.push_assert([tool_is(0, "close")])
        assert s.check_sat().is_unsat
        s.pop(frame)
        assert s.check_sat().is_sat


def test_nested_frames_pop_in_order(decls):
    with open_session(decls, 5000, backend="z3") as s:
        f1 = s.push_assert([tool_is(0, "open")])
        f2 = s.push_assert([tool_is(1, "close")])
        s.push_assert([tool_is(1, "open")])  # contradicts frame 2
        assert s.check_sat().is_unsat
        s.pop()  # innermost
        assert s.check_sat().is_sat
        s.pop(f2)
        s.pop(f1)
        assert s.check_sat().is_sat


def test_pop_on_empty_stack_fails(decls):
    with open_session(decls, 5000, backend="z3") as s:
        with pytest.raises(SolverError):
            s.pop()


def test_stats_count_queries(decls):
    with open_session(decls, 5000, backend="z3") as s:
        s.push_assert([tool_is(0, "open")])
        s.check_sat()
        s.check_sat()
        assert s.stats.checks == 2
        assert s.stats.sat == 2 and s.stats.unsat == 0


def test_closed_session_rejects_use(decls):
    s = open_session(decls, 5000, backend="z3")
    s.close()
    with pytest.raises(SolverError):
        s.check_sat()
    s.close()  # idempotent


# --------------------------------------------------------------------------
# Backend selection
# --------------------------------------------------------------------------


def test_timeout_must_be_positive(decls):
    with pytest.raises(ValueError):
        open_session(decls, 0)


def test_unknown_backend_rejected(decls):
    with pytest.raises(ValueError):
        open_session(decls, 1000, backend="cvc9")


def test_pipe_backend_requires_command(decls, monkeypatch):
    monkeypatch.delenv(SMT_CMD_ENV, raising=False)
    with pytest.raises(BackendUnavailable):
        open_session(decls, 1000, backend="pipe")


def test_auto_backend_defaults_to_in_process(decls, monkeypatch):
    monkeypatch.delenv(SMT_CMD_ENV, raising=False)
    with open_session(decls, 5000, backend="auto") as s:
        s.push_assert([tool_is(0, "open")])
        assert s.check_sat().is_sat


# --------------------------------------------------------------------------
# SMT-LIB rendering
# --------------------------------------------------------------------------


def test_script_declares_symbols_and_asserts(decls):
    text = script(decls, [tool_is(0, "open")])
    assert text.startswith("(set-logic ALL)")
    assert "(declare-" in text
    assert "(assert" in text
    assert text.rstrip().endswith("(check-sat)")


def test_script_renders_string_literals(decls):
    from agentc.dsl import SORT_STRING
    from agentc.fol import ArgOf, Lit
    formula = Rel("==", ArgOf("open", "file", TimeLit(0)),
                  Lit('say "hi"', SORT_STRING))
    text = script(decls, [formula], check=False)
    # SMT-LIB escapes a double quote by doubling it
    assert '""hi""' in text


def test_script_is_deterministic(decls):
    t = TimeVar("t")
    formulas = [tool_is(0, "open"),
                FExists(t, Rel("==", ToolAt(t), ToolConst("close")))]
    assert script(decls, formulas) == script(decls, formulas)
