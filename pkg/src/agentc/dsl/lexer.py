"""Tokenizer for the policy specification language.

Hand-rolled character walker.  Tracks 1-based line/column for diagnostics.
`#` starts a comment running to end of line.  Unicode connective spellings
are folded onto their ASCII token types.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DslSyntaxError


class TT:
    IDENT = "IDENT"
    INT = "INT"
    FLOAT = "FLOAT"
    STRING = "STRING"
    DOTSTAR = "DOTSTAR"      # .*
    LPAREN = "LPAREN"
    RPAREN = "RPAREN"
    COMMA = "COMMA"
    COLON = "COLON"
    EQ = "EQ"                # =   (argument binding)
    REL = "REL"              # == != >= > <= <
    AND = "AND"              # && or ∧
    OR = "OR"                # || or ∨
    NOT = "NOT"              # ~ or ¬
    PLUS = "PLUS"            # +
    STAR = "STAR"            # *
    EOF = "EOF"


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    line: int
    col: int


_SIMPLE = {
    "(": TT.LPAREN,
    ")": TT.RPAREN,
    ",": TT.COMMA,
    ":": TT.COLON,
    "+": TT.PLUS,
    "∧": TT.AND,
    "∨": TT.OR,
    "~": TT.NOT,
    "¬": TT.NOT,
}


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str) -> DslSyntaxError:
        return DslSyntaxError(msg, line, col)

    while i < n:
        ch = text[i]

        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r\f":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue

        start_line, start_col = line, col

        if ch in _SIMPLE:
            tokens.append(Token(_SIMPLE[ch], ch, start_line, start_col))
            i += 1
            col += 1
            continue

        if ch == "&":
            if i + 1 < n and text[i + 1] == "&":
                tokens.append(Token(TT.AND, "&&", start_line, start_col))
                i += 2
                col += 2
                continue
            raise err("lone '&' (use '&&')")

        if ch == "|":
            if i + 1 < n and text[i + 1] == "|":
                tokens.append(Token(TT.OR, "||", start_line, start_col))
                i += 2
                col += 2
                continue
            raise err("lone '|' (use '||')")

        if ch == "=":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token(TT.REL, "==", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(Token(TT.EQ, "=", start_line, start_col))
                i += 1
                col += 1
            continue

        if ch == "!":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token(TT.REL, "!=", start_line, start_col))
                i += 2
                col += 2
                continue
            raise err("lone '!' (use '!=')")

        if ch in "<>":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token(TT.REL, ch + "=", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(Token(TT.REL, ch, start_line, start_col))
                i += 1
                col += 1
            continue

        if ch == ".":
            if i + 1 < n and text[i + 1] == "*":
                tokens.append(Token(TT.DOTSTAR, ".*", start_line, start_col))
                i += 2
                col += 2
                continue
            raise err("unexpected '.' (wildcard is '.*')")

        if ch == "*":
            tokens.append(Token(TT.STAR, "*", start_line, start_col))
            i += 1
            col += 1
            continue

        if ch == '"':
            j = i + 1
            buf: list[str] = []
            while j < n:
                c = text[j]
                if c == '"':
                    break
                if c == "\n":
                    raise err("unterminated string")
                if c == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                    continue
                buf.append(c)
                j += 1
            if j >= n:
                raise err("unterminated string")
            tokens.append(Token(TT.STRING, "".join(buf), start_line, start_col))
            col += (j + 1) - i
            i = j + 1
            continue

        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1 if ch == "-" else i
            while j < n and text[j].isdigit():
                j += 1
            is_float = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            lexeme = text[i:j]
            tokens.append(Token(TT.FLOAT if is_float else TT.INT, lexeme, start_line, start_col))
            col += j - i
            i = j
            continue

        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            tokens.append(Token(TT.IDENT, text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue

        raise err(f"unexpected character {ch!r}")

    tokens.append(Token(TT.EOF, "", line, col))
    return tokens
