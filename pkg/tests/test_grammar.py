"""The tool-call surface grammar: block extraction, incremental
non-terminal spans, argument decoding, and canonical rendering."""

from __future__ import annotations

import json

import pytest

from agentc.grammar.toolcall import (
    FN_END,
    FN_START,
    GRAMMAR_TEXT,
    CompositeValue,
    ParsedCall,
    parse_arg_text,
    parse_nonterminal,
    parse_toolcall,
    render_call,
    render_value,
)


def block(name: str, **args) -> str:
    return render_call(name, args)


# --------------------------------------------------------------------------
# Whole-text extraction
# --------------------------------------------------------------------------


def test_single_block_parses():
    out = parse_toolcall(block("open", file="a"))
    assert out.parsed == ParsedCall("open", (("file", "a"),))
    assert out.prose == ""


def test_prose_around_the_block_is_preserved():
    text = "Let me check.\n" + block("open", file="a") + "\nDone."
    out = parse_toolcall(text)
    assert out.parsed.name == "open"
    assert out.prose == "Let me check.\n\nDone."


def test_pure_prose_is_not_a_call():
    out = parse_toolcall("I cannot help with that request.")
    assert out.parsed is None
    assert out.prose == "I cannot help with that request."


def test_zero_argument_call():
    out = parse_toolcall(
        f'{FN_START}{{"name": "ping", "arguments": {{}}}}{FN_END}')
    assert out.parsed == ParsedCall("ping", ())


def test_value_kinds_decode():
    text = (f'{FN_START}{{"name": "w", "arguments": '
            f'{{"s": "x", "i": 3, "f": 1.5, "b": true, "n": null}}}}{FN_END}')
    out = parse_toolcall(text)
    assert out.parsed.args_dict() == {
        "s": "x", "i": 3, "f": 1.5, "b": True, "n": None}


def test_composite_values_keep_canonical_text():
    text = (f'{FN_START}{{"name": "w", "arguments": '
            f'{{"ids": ["a", "b"], "meta": {{"k": 1}}}}}}{FN_END}')
    out = parse_toolcall(text)
    args = out.parsed.args_dict()
    assert isinstance(args["ids"], CompositeValue)
    assert json.loads(args["ids"].text) == ["a", "b"]
    assert json.loads(args["meta"].text) == {"k": 1}


def test_two_blocks_count_as_prose():
    text = block("open", file="a") + block("close", file="a")
    out = parse_toolcall(text)
    assert out.parsed is None


def test_malformed_block_is_prose_not_an_error():
    for text in (
        f'{FN_START}{{"name": "open"}}{FN_END}',          # no arguments key
        f'{FN_START}{{"name": "open", "arguments": ',     # truncated
        f'{FN_START}not json{FN_END}',
        f'{FN_START}{{"arguments": {{}}, "name": "x"}}{FN_END}',  # wrong order
    ):
        out = parse_toolcall(text)
        assert out.parsed is None
        assert out.prose == text


def test_broken_block_followed_by_good_block():
    text = f'{FN_START}oops ' + block("open", file="a")
    out = parse_toolcall(text)
    assert out.parsed == ParsedCall("open", (("file", "a"),))


# --------------------------------------------------------------------------
# Non-terminal spans (incremental extraction)
# --------------------------------------------------------------------------


def test_name_span_is_the_quoted_value():
    text = block("open", file="a")
    spans = parse_nonterminal(text, "name")
    assert len(spans) == 1
    assert spans[0].text == '"open"'
    assert text[spans[0].start:spans[0].end] == '"open"'


def test_arg_spans_in_order():
    text = block("w", a="x", b=2)
    spans = parse_nonterminal(text, "arg")
    assert [s.text for s in spans] == ['"a": "x"', '"b": 2']


def test_partial_block_yields_completed_spans_only():
    text = f'{FN_START}{{"name": "open", "arguments": {{"file": "a", '
    assert [s.text for s in parse_nonterminal(text, "name")] == ['"open"']
    assert [s.text for s in parse_nonterminal(text, "arg")] == ['"file": "a"']
    # args (the whole argument object) is not complete yet
    assert parse_nonterminal(text, "args") == []
    assert parse_nonterminal(text, "start") == []


def test_complete_block_yields_start_and_args_spans():
    text = "pre " + block("open", file="a") + " post"
    start = parse_nonterminal(text, "start")
    assert len(start) == 1 and start[0].text.startswith(FN_START)
    args = parse_nonterminal(text, "args")
    assert len(args) == 1
    assert args[0].text == '"arguments": {"file": "a"}'


def test_unknown_nonterminal_rejected():
    with pytest.raises(ValueError):
        parse_nonterminal("anything", "verb")


def test_arg_text_decodes_key_and_value():
    assert parse_arg_text('"file": "a"') == ("file", "a")
    assert parse_arg_text('"n": 3') == ("n", 3)
    assert parse_arg_text('"flag": false') == ("flag", False)
    key, val = parse_arg_text('"ids": [1, 2]')
    assert key == "ids" and isinstance(val, CompositeValue)


def test_arg_text_rejects_non_arg_spans():
    with pytest.raises(ValueError):
        parse_arg_text('not an arg')


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------


def test_render_value_forms():
    assert render_value("a") == '"a"'
    assert render_value(3) == "3"
    assert render_value(1.5) == "1.5"
    assert render_value(True) == "true"
    assert render_value(None) == "null"
    assert render_value(CompositeValue('["x"]')) == '["x"]'


def test_render_rejects_embedded_quotes():
    with pytest.raises(ValueError):
        render_value('say "hi"')


def test_render_parse_round_trip():
    for name, args in (
        ("open", {"file": "a"}),
        ("w", {"s": "x", "i": 3, "b": False}),
        ("ping", {}),
    ):
        out = parse_toolcall(render_call(name, args))
        assert out.parsed is not None
        assert out.parsed.name == name
        assert out.parsed.args_dict() == args


def test_grammar_text_names_the_productions():
    for production in ("fn_name", "fn_args", "fn_arg", "fn_start", "fn_end"):
        assert production in GRAMMAR_TEXT
    assert FN_START in GRAMMAR_TEXT and FN_END in GRAMMAR_TEXT
