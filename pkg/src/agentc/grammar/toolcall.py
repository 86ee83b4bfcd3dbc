"""Tool-call text grammar.

A call is one `<tool_call>{...}</tool_call>` block whose body is a two-key
JSON-like object: a "name" string and an "arguments" object.  Strings carry
no escape sequences (a quote simply ends the string); whitespace between
tokens is insignificant; everything outside the block is prose.

Besides whole-call parsing, this module extracts occurrences of individual
grammar productions from *partial* text — the constrained generator emits a
block piecewise and needs to locate the name or the latest argument in text
that does not yet parse as a complete call.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

GRAMMAR_TEXT = """\
?start: fn_start "{" fn_name "," fn_args "}" fn_end

fn_start: "<tool_call>"
fn_end: "</tool_call>"

fn_name: "\\"name\\"" ":" fn_name_val
fn_name_val: UNESCAPED_STRING

fn_args: "\\"arguments\\"" ":" fn_arg_vals
fn_arg_vals: "{" (fn_arg ("," fn_arg)*)? "}"
fn_arg: fn_arg_name ":" fn_arg_val
fn_arg_name: UNESCAPED_STRING
fn_arg_val: value

value: object
     | UNESCAPED_STRING
     | array
     | SIGNED_NUMBER
     | "true"
     | "false"
     | "null"

object: "{" (pair ("," pair)*)? "}"
pair: UNESCAPED_STRING ":" value
array: "[" (value ("," value)*)? "]"

UNESCAPED_STRING: /\\"[^"]*\\"/
SIGNED_NUMBER: /[+-]?([0-9]+(\\.[0-9]+)?([eE][+-]?[0-9]+)?|\\.[0-9]+)/

%ignore WS
"""

FN_START = "<tool_call>"
FN_END = "</tool_call>"

NONTERMINALS = ("name", "arg", "args", "start")


@dataclass(frozen=True)
class CompositeValue:
    """An array- or object-shaped argument, kept as canonical serialized
    text; the scalar value domain has no structured members."""

    text: str


RawValue = Union[bool, int, float, str, None, CompositeValue]


@dataclass(frozen=True)
class Occurrence:
    start: int  # byte offset of the first character
    end: int  # byte offset one past the last character
    text: str


@dataclass(frozen=True)
class ParsedCall:
    name: str
    args: tuple[tuple[str, RawValue], ...]

    def args_dict(self) -> dict[str, RawValue]:
        return dict(self.args)


@dataclass(frozen=True)
class ToolCallText:
    raw: str
    parsed: Optional[ParsedCall]
    prose: str  # text outside the block (the whole text when no call parses)


class _Stop(Exception):
    """Input diverged from the grammar (or simply ran out)."""


class _Scanner:
    def __init__(self, text: str, pos: int):
        self.text = text
        self.pos = pos
        self.spans: dict[str, list[Occurrence]] = {
            "name": [], "arg": [], "args": []}

    # ------------------------------------------------------------- helpers

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def literal(self, s: str) -> None:
        if not self.text.startswith(s, self.pos):
            raise _Stop()
        self.pos += len(s)

    def punct(self, ch: str) -> None:
        self.skip_ws()
        self.literal(ch)

    def string_token(self) -> tuple[str, int, int]:
        """UNESCAPED_STRING: a quote, any non-quote characters, a quote."""
        self.skip_ws()
        start = self.pos
        if start >= len(self.text) or self.text[start] != '"':
            raise _Stop()
        end = self.text.find('"', start + 1)
        if end < 0:
            raise _Stop()
        self.pos = end + 1
        return self.text[start + 1:end], start, end + 1

    def number_token(self) -> Union[int, float]:
        self.skip_ws()
        start = self.pos
        i = start
        text = self.text
        if i < len(text) and text[i] in "+-":
            i += 1
        digits_before = i
        while i < len(text) and text[i].isdigit():
            i += 1
        is_float = False
        if i < len(text) and text[i] == ".":
            i += 1
            frac_start = i
            while i < len(text) and text[i].isdigit():
                i += 1
            if i == frac_start:
                raise _Stop()
            is_float = True
        if i == digits_before or (i == digits_before + 1 and is_float is False):
            # no digits at all
            if not any(c.isdigit() for c in text[start:i]):
                raise _Stop()
        if i < len(text) and text[i] in "eE":
            j = i + 1
            if j < len(text) and text[j] in "+-":
                j += 1
            exp_start = j
            while j < len(text) and text[j].isdigit():
                j += 1
            if j > exp_start:
                i = j
                is_float = True
        token = text[start:i]
        if not any(c.isdigit() for c in token):
            raise _Stop()
        self.pos = i
        return float(token) if is_float else int(token)

    # -------------------------------------------------------------- values

    def value(self) -> RawValue:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise _Stop()
        ch = self.text[self.pos]
        if ch == '"':
            s, _, _ = self.string_token()
            return s
        if ch == "{":
            return CompositeValue(_canonical(self._object()))
        if ch == "[":
            return CompositeValue(_canonical(self._array()))
        for word, val in (("true", True), ("false", False), ("null", None)):
            if self.text.startswith(word, self.pos):
                self.pos += len(word)
                return val
        return self.number_token()

    def _plain_value(self):
        """Value as a plain Python object (inside composites)."""
        v = self.value()
        if isinstance(v, CompositeValue):
            return json.loads(v.text)
        return v

    def _object(self) -> dict:
        self.punct("{")
        out: dict = {}
        self.skip_ws()
        if self.text.startswith("}", self.pos):
            self.pos += 1
            return out
        while True:
            key, _, _ = self.string_token()
            self.punct(":")
            out[key] = self._plain_value()
            self.skip_ws()
            if self.text.startswith(",", self.pos):
                self.pos += 1
                continue
            self.punct("}")
            return out

    def _array(self) -> list:
        self.punct("[")
        out: list = []
        self.skip_ws()
        if self.text.startswith("]", self.pos):
            self.pos += 1
            return out
        while True:
            out.append(self._plain_value())
            self.skip_ws()
            if self.text.startswith(",", self.pos):
                self.pos += 1
                continue
            self.punct("]")
            return out

    # --------------------------------------------------------------- block

    def block(self) -> tuple[ParsedCall, int]:
        """Parse one complete block starting at self.pos; returns the call
        and the end offset.  Raises _Stop when the text diverges — spans
        collected up to that point remain available for partial extraction."""
        start = self.pos
        self.literal(FN_START)
        self.punct("{")
        key, kstart, _ = self.string_token()
        if key != "name":
            raise _Stop()
        self.punct(":")
        name, nstart, nend = self.string_token()
        self.spans["name"].append(
            Occurrence(nstart, nend, self.text[nstart:nend]))
        self.punct(",")
        self.skip_ws()
        args_start = self.pos
        key, _, _ = self.string_token()
        if key != "arguments":
            raise _Stop()
        self.punct(":")
        self.punct("{")
        args: list[tuple[str, RawValue]] = []
        self.skip_ws()
        if self.text.startswith("}", self.pos):
            self.pos += 1
        else:
            while True:
                self.skip_ws()
                arg_start = self.pos
                arg_name, _, _ = self.string_token()
                self.punct(":")
                val = self.value()
                args.append((arg_name, val))
                self.spans["arg"].append(Occurrence(
                    arg_start, self.pos, self.text[arg_start:self.pos]))
                self.skip_ws()
                if self.text.startswith(",", self.pos):
                    self.pos += 1
                    continue
                self.punct("}")
                break
        self.spans["args"].append(Occurrence(
            args_start, self.pos, self.text[args_start:self.pos]))
        self.punct("}")
        self.skip_ws()
        self.literal(FN_END)
        return ParsedCall(name, tuple(args)), self.pos


def _canonical(obj) -> str:
    return json.dumps(obj, separators=(", ", ": "))


def _scan_blocks(text: str):
    """All block attempts: (start offset, scanner, call-or-None, end)."""
    attempts = []
    pos = 0
    while True:
        start = text.find(FN_START, pos)
        if start < 0:
            break
        sc = _Scanner(text, start)
        try:
            call, end = sc.block()
        except _Stop:
            call, end = None, None
        attempts.append((start, sc, call, end))
        pos = (end if end is not None else start + len(FN_START))
    return attempts


def parse_toolcall(text: str) -> ToolCallText:
    """Extract the call when the text contains exactly one well-formed
    block; otherwise the text is prose (never an error)."""
    complete = [(s, c, e) for s, _, c, e in _scan_blocks(text) if c is not None]
    if len(complete) != 1:
        return ToolCallText(raw=text, parsed=None, prose=text)
    start, call, end = complete[0]
    return ToolCallText(raw=text, parsed=call,
                        prose=text[:start] + text[end:])


def parse_nonterminal(text: str, nt: str) -> list[Occurrence]:
    """Every maximal substring of `text` derivable from the production `nt`,
    in textual order, with byte offsets.  Partial blocks contribute the
    occurrences completed so far, which is what incremental emission needs."""
    if nt not in NONTERMINALS:
        raise ValueError(f"unknown non-terminal {nt!r}; expected one of "
                         f"{', '.join(NONTERMINALS)}")
    attempts = _scan_blocks(text)
    if nt == "start":
        complete = [(s, e) for s, _, c, e in attempts if c is not None]
        if len(complete) != 1:
            return []
        s, e = complete[0]
        return [Occurrence(s, e, text[s:e])]
    occurrences: list[Occurrence] = []
    for _, sc, _, _ in attempts:
        occurrences.extend(sc.spans[nt])
    occurrences.sort(key=lambda o: o.start)
    return occurrences


def parse_arg_text(text: str) -> tuple[str, RawValue]:
    """Decode one `"key": value` span (as returned for the `arg`
    non-terminal) into its key and typed value."""
    sc = _Scanner(text, 0)
    try:
        key, _, _ = sc.string_token()
        sc.punct(":")
        value = sc.value()
    except _Stop:
        raise ValueError(f"not an argument span: {text!r}") from None
    return key, value


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------


def render_value(value: RawValue) -> str:
    if isinstance(value, CompositeValue):
        return value.text
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        if '"' in value:
            raise ValueError(
                "string arguments cannot contain a double quote: the grammar "
                "has no escape sequences")
        return '"' + value + '"'
    if isinstance(value, (int, float)):
        return repr(value)
    raise TypeError(f"unrenderable value: {value!r}")


def render_args(args) -> str:
    if hasattr(args, "items"):
        args = args.items()
    return "{" + ", ".join(
        f'"{name}": {render_value(v)}' for name, v in args) + "}"


def render_call(name: str, args) -> str:
    """Canonical single-block text for a call."""
    return (f'{FN_START}{{"name": "{name}", '
            f'"arguments": {render_args(args)}}}{FN_END}')
