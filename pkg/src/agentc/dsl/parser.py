"""Recursive-descent parser for the policy specification language.

Grammar (one formula per file; `#` comments; keywords case-insensitive):

    formula     ::= or_f
    or_f        ::= and_f (("||" | "∨") and_f)*
    and_f       ::= unary_f (("&&" | "∧") unary_f)*
    unary_f     ::= ("~" | "¬") unary_f | "(" formula ")" | predicate
    predicate   ::= ("before"|"after"|"seq"|"sequence") "(" event "," constraint "," event "," constraint ")"
                  | ("exists"|"forall") "(" event "," constraint ")"
    event       ::= (ident ":")? ident "(" (arg ("," arg)*)? ")"
    arg         ::= ident "=" pattern
    pattern     ::= ".*" | constant | ident
    constraint  ::= c_or
    c_or        ::= c_and (("||" | "∨") c_and)*
    c_and       ::= c_unary (("&&" | "∧") c_unary)*
    c_unary     ::= ("~" | "¬") c_unary | "(" constraint ")" | comparison
    comparison  ::= operand (("=="|"!="|">="|">"|"<="|"<") operand)?
    operand     ::= constant | "output" "(" ident ")"
                  | ("state"|"bool_from_state"|"str_from_state") "(" ident "(" ident ("," ident)* ")" ")"
                  | fn "(" literal ("," literal)* ")" | ident
    literal     ::= constant | fn "(" literal ("," literal)* ")" | ident
    fn          ::= "+" | "*" | "strlen" | "concat" | "contains"
    constant    ::= int | float | string | "true" | "false"

`!=` desugars to negated equality.  `~sequence(...)` is an ordinary negation
of a sequence predicate.  `bool_from_state`/`str_from_state` are aliases of
`state` (result sort comes from the projection catalog during validation).
"""

from __future__ import annotations

from .ast import (
    And,
    After,
    ArgPattern,
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
    Formula,
    FunctionApp,
    LiteralTerm,
    Not,
    Operand,
    Or,
    OutputRef,
    Seq,
    SpecAst,
    StateRef,
    Variable,
    WILDCARD,
)
from .lexer import TT, Token, tokenize
from ..errors import DslSyntaxError

_PREDICATE_KEYWORDS = {"before", "after", "seq", "sequence", "exists", "forall"}
_STATE_KEYWORDS = {"state", "bool_from_state", "str_from_state"}
_NAMED_FUNCTIONS = {"strlen", "concat", "contains"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # ------------------------------------------------------------- plumbing

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != TT.EOF:
            self.pos += 1
        return tok

    def error(self, message: str, *expected: str) -> DslSyntaxError:
        tok = self.peek()
        return DslSyntaxError(message, tok.line, tok.col, tuple(expected))

    def expect(self, ttype: str, what: str) -> Token:
        tok = self.peek()
        if tok.type != ttype:
            raise self.error(f"found {tok.value!r}" if tok.value else "found end of input", what)
        return self.advance()

    def keyword(self) -> str:
        """Lowercased identifier text at the cursor ('' when not an ident)."""
        tok = self.peek()
        return tok.value.lower() if tok.type == TT.IDENT else ""

    # -------------------------------------------------------------- formula

    def parse_formula(self) -> Formula:
        lhs = self.parse_and_formula()
        while self.peek().type == TT.OR:
            self.advance()
            lhs = Or(lhs, self.parse_and_formula())
        return lhs

    def parse_and_formula(self) -> Formula:
        lhs = self.parse_unary_formula()
        while self.peek().type == TT.AND:
            self.advance()
            lhs = And(lhs, self.parse_unary_formula())
        return lhs

    def parse_unary_formula(self) -> Formula:
        tok = self.peek()
        if tok.type == TT.NOT:
            self.advance()
            return Not(self.parse_unary_formula())
        if tok.type == TT.LPAREN:
            self.advance()
            inner = self.parse_formula()
            self.expect(TT.RPAREN, "')'")
            return inner
        return self.parse_predicate()

    def parse_predicate(self) -> Formula:
        kw = self.keyword()
        if kw not in _PREDICATE_KEYWORDS:
            raise self.error(
                f"found {self.peek().value!r}" if self.peek().value else "found end of input",
                "'before'", "'after'", "'sequence'", "'exists'", "'forall'", "'('", "'~'",
            )
        self.advance()
        self.expect(TT.LPAREN, "'('")
        first_tool, first_pats, first_binder = self.parse_event()
        self.expect(TT.COMMA, "','")
        first_constraint = self.parse_constraint()
        if kw in ("exists", "forall"):
            self.expect(TT.RPAREN, "')'")
            evc = EventConstraint(first_tool, first_pats, first_constraint, first_binder)
            return Exists(evc) if kw == "exists" else Forall(evc)
        self.expect(TT.COMMA, "','")
        second_tool, second_pats, second_binder = self.parse_event()
        self.expect(TT.COMMA, "','")
        second_constraint = self.parse_constraint()
        self.expect(TT.RPAREN, "')'")
        evc1 = EventConstraint(first_tool, first_pats, first_constraint, first_binder)
        evc2 = EventConstraint(second_tool, second_pats, second_constraint, second_binder)
        if kw == "before":
            return Before(trigger=evc1, earlier=evc2)
        if kw == "after":
            return After(trigger=evc1, later=evc2)
        return Seq(first=evc1, second=evc2)

    def parse_event(self) -> tuple[str, tuple[tuple[str, ArgPattern], ...], str | None]:
        name = self.expect(TT.IDENT, "tool name").value
        binder: str | None = None
        if self.peek().type == TT.COLON:
            self.advance()
            binder = name
            name = self.expect(TT.IDENT, "tool name").value
        self.expect(TT.LPAREN, "'('")
        patterns: list[tuple[str, ArgPattern]] = []
        if self.peek().type != TT.RPAREN:
            patterns.append(self.parse_event_arg())
            while self.peek().type == TT.COMMA:
                self.advance()
                patterns.append(self.parse_event_arg())
        self.expect(TT.RPAREN, "')'")
        return name, tuple(patterns), binder

    def parse_event_arg(self) -> tuple[str, ArgPattern]:
        name = self.expect(TT.IDENT, "argument name").value
        self.expect(TT.EQ, "'='")
        tok = self.peek()
        if tok.type == TT.DOTSTAR:
            self.advance()
            return name, WILDCARD
        if tok.type in (TT.INT, TT.FLOAT, TT.STRING):
            return name, self.parse_constant()
        if tok.type == TT.IDENT:
            low = tok.value.lower()
            if low in ("true", "false"):
                self.advance()
                return name, Constant(low == "true")
            self.advance()
            return name, Variable(tok.value)
        raise self.error(
            f"found {tok.value!r}" if tok.value else "found end of input",
            "variable", "constant", "'.*'",
        )

    # ----------------------------------------------------------- constraint

    def parse_constraint(self):
        lhs = self.parse_constraint_and()
        while self.peek().type == TT.OR:
            self.advance()
            lhs = COr(lhs, self.parse_constraint_and())
        return lhs

    def parse_constraint_and(self):
        lhs = self.parse_constraint_unary()
        while self.peek().type == TT.AND:
            self.advance()
            lhs = CAnd(lhs, self.parse_constraint_unary())
        return lhs

    def parse_constraint_unary(self):
        tok = self.peek()
        if tok.type == TT.NOT:
            self.advance()
            return CNot(self.parse_constraint_unary())
        if tok.type == TT.LPAREN:
            self.advance()
            inner = self.parse_constraint()
            self.expect(TT.RPAREN, "')'")
            return inner
        return self.parse_comparison()

    def parse_comparison(self):
        lhs = self.parse_operand()
        if self.peek().type == TT.REL:
            rel = self.advance().value
            rhs = self.parse_operand()
            if rel == "!=":
                return CNot(Comparison("==", lhs, rhs))
            return Comparison(rel, lhs, rhs)
        return BoolTerm(lhs)

    def parse_operand(self) -> Operand:
        tok = self.peek()
        if tok.type in (TT.INT, TT.FLOAT, TT.STRING):
            return self.parse_constant()
        if tok.type in (TT.PLUS, TT.STAR):
            return self.parse_function_app()
        if tok.type == TT.IDENT:
            low = tok.value.lower()
            if low in ("true", "false"):
                self.advance()
                return Constant(low == "true")
            if low == "output":
                self.advance()
                self.expect(TT.LPAREN, "'('")
                binder = self.expect(TT.IDENT, "binder name").value
                self.expect(TT.RPAREN, "')'")
                return OutputRef(binder)
            if low in _STATE_KEYWORDS:
                self.advance()
                self.expect(TT.LPAREN, "'('")
                proj = self.expect(TT.IDENT, "projection name").value
                self.expect(TT.LPAREN, "'('")
                args = [self.expect(TT.IDENT, "variable").value]
                while self.peek().type == TT.COMMA:
                    self.advance()
                    args.append(self.expect(TT.IDENT, "variable").value)
                self.expect(TT.RPAREN, "')'")
                self.expect(TT.RPAREN, "')'")
                return StateRef(proj, tuple(args))
            if low in _NAMED_FUNCTIONS:
                return self.parse_function_app()
            if self.peek(1).type == TT.LPAREN:
                raise self.error(f"unknown function {tok.value!r}",
                                 "'strlen'", "'concat'", "'contains'", "'state'", "'output'")
            self.advance()
            return Variable(tok.value)
        raise self.error(
            f"found {tok.value!r}" if tok.value else "found end of input",
            "constant", "variable", "function application",
        )

    def parse_function_app(self) -> FunctionApp:
        tok = self.advance()
        fn = tok.value.lower() if tok.type == TT.IDENT else tok.value
        self.expect(TT.LPAREN, "'('")
        args = [self.parse_literal()]
        while self.peek().type == TT.COMMA:
            self.advance()
            args.append(self.parse_literal())
        self.expect(TT.RPAREN, "')'")
        return FunctionApp(fn, tuple(args))

    def parse_literal(self) -> LiteralTerm:
        tok = self.peek()
        if tok.type in (TT.INT, TT.FLOAT, TT.STRING):
            return self.parse_constant()
        if tok.type in (TT.PLUS, TT.STAR):
            return self.parse_function_app()
        if tok.type == TT.IDENT:
            low = tok.value.lower()
            if low in ("true", "false"):
                self.advance()
                return Constant(low == "true")
            if low in _NAMED_FUNCTIONS:
                return self.parse_function_app()
            self.advance()
            return Variable(tok.value)
        raise self.error(
            f"found {tok.value!r}" if tok.value else "found end of input",
            "constant", "variable", "function application",
        )

    def parse_constant(self) -> Constant:
        tok = self.advance()
        if tok.type == TT.INT:
            return Constant(int(tok.value))
        if tok.type == TT.FLOAT:
            return Constant(float(tok.value))
        return Constant(tok.value)


def parse_spec(text: str) -> SpecAst:
    """Parse specification source text into an unvalidated syntax tree."""
    parser = _Parser(tokenize(text))
    root = parser.parse_formula()
    trailing = parser.peek()
    if trailing.type != TT.EOF:
        raise parser.error(f"trailing input {trailing.value!r}", "end of input")
    return SpecAst(root)
