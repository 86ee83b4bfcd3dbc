"""SMT-LIB 2 text for the formula IR.

Used by the pipe backend and by the artifact dumps (`--smtlib`,
`--dump-smt`).  Symbols containing dots are written as quoted symbols; string
literals use the SMT-LIB doubling escape; reals are written exactly as
rationals so external solvers and the in-process backend agree on values.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from ..dsl.ast import SORT_BOOL, SORT_INT, SORT_REAL, SORT_STRING
from ..errors import UndeclaredSymbol
from ..fol import (
    App,
    ArgOf,
    Declarations,
    FAnd,
    FExists,
    FForall,
    FImplies,
    FNot,
    FolFormula,
    FOr,
    Lit,
    OutAt,
    Rel,
    StObs,
    Term,
    TermAtom,
    TimeLit,
    TimeVar,
    ToolAt,
    ToolConst,
)

_SORT_TEXT = {
    SORT_INT: "Int",
    SORT_REAL: "Real",
    SORT_STRING: "String",
    SORT_BOOL: "Bool",
}

_APP_TEXT = {
    "+": "+",
    "*": "*",
    "strlen": "str.len",
    "concat": "str.++",
    "contains": "str.contains",
    "to_real": "to_real",
}

_REL_TEXT = {"==": "=", ">=": ">=", ">": ">", "<=": "<=", "<": "<"}


def _sym(name: str) -> str:
    """Quote anything that is not a plain simple symbol."""
    if name and all(c.isalnum() or c in "_-" for c in name) \
            and not name[0].isdigit():
        return name
    return "|" + name + "|"


def _string_lit(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


def _int_lit(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def _real_lit(v: float) -> str:
    frac = Fraction(v).limit_denominator(10 ** 12)
    if frac != Fraction(v):  # keep the exact binary value
        frac = Fraction(v)
    num, den = frac.numerator, frac.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    if den == 1:
        body = f"{num}.0"
    else:
        body = f"(/ {num}.0 {den}.0)"
    return f"(- {body})" if sign else body


def term_text(t: Term) -> str:
    if isinstance(t, Lit):
        if t.sort == SORT_BOOL:
            return "true" if t.value else "false"
        if t.sort == SORT_STRING:
            return _string_lit(t.value)
        if t.sort == SORT_REAL:
            return _real_lit(float(t.value))
        return _int_lit(int(t.value))
    if isinstance(t, TimeLit):
        return _int_lit(t.value)
    if isinstance(t, TimeVar):
        return _sym(t.name)
    if isinstance(t, ToolConst):
        return _sym(t.name)
    if isinstance(t, ToolAt):
        return f"(toolAt {term_text(t.time)})"
    if isinstance(t, ArgOf):
        return f"({_sym(f'arg.{t.tool}.{t.param}')} {term_text(t.time)})"
    if isinstance(t, OutAt):
        return f"(outAt {term_text(t.time)})"
    if isinstance(t, StObs):
        parts = [term_text(a) for a in t.args] + [term_text(t.time)]
        return f"({_sym(f'st.{t.projection}')} {' '.join(parts)})"
    if isinstance(t, App):
        args = " ".join(term_text(a) for a in t.args)
        return f"({_APP_TEXT[t.fn]} {args})"
    raise TypeError(f"not a term: {t!r}")  # pragma: no cover


def formula_text(f: FolFormula) -> str:
    if isinstance(f, Rel):
        return f"({_REL_TEXT[f.op]} {term_text(f.lhs)} {term_text(f.rhs)})"
    if isinstance(f, TermAtom):
        return term_text(f.term)
    if isinstance(f, FNot):
        return f"(not {formula_text(f.inner)})"
    if isinstance(f, FAnd):
        if not f.parts:
            return "true"
        return f"(and {' '.join(formula_text(p) for p in f.parts)})"
    if isinstance(f, FOr):
        if not f.parts:
            return "false"
        return f"(or {' '.join(formula_text(p) for p in f.parts)})"
    if isinstance(f, FImplies):
        return f"(=> {formula_text(f.lhs)} {formula_text(f.rhs)})"
    if isinstance(f, FForall):
        return f"(forall (({_sym(f.var.name)} Int)) {formula_text(f.body)})"
    if isinstance(f, FExists):
        return f"(exists (({_sym(f.var.name)} Int)) {formula_text(f.body)})"
    raise TypeError(f"not a formula: {f!r}")  # pragma: no cover


def declaration_lines(decls: Declarations) -> list[str]:
    ctors = " ".join(f"({_sym(t)})" for t in decls.tools)
    lines = [
        f"(declare-datatypes ((Tool 0)) ((ctors)))".replace("ctors", ctors),
        "(declare-fun toolAt (Int) Tool)",
        "(declare-fun outAt (Int) String)",
    ]
    for tool, params in decls.tool_params.items():
        for pname, psort in params:
            lines.append(
                f"(declare-fun {_sym(decls.arg_fn_name(tool, pname))} "
                f"(Int) {_SORT_TEXT[psort]})")
    for proj, (arg_sorts, ret) in decls.projections.items():
        domain = " ".join([_SORT_TEXT[s] for s in arg_sorts] + ["Int"])
        lines.append(
            f"(declare-fun {_sym(decls.st_fn_name(proj))} "
            f"({domain}) {_SORT_TEXT[ret]})")
    return lines


def assert_line(f: FolFormula) -> str:
    return f"(assert {formula_text(f)})"


def script(decls: Declarations, formulas: Sequence[FolFormula],
           *, check: bool = True, logic: str = "ALL") -> str:
    lines = [f"(set-logic {logic})"] if logic else []
    lines.extend(declaration_lines(decls))
    lines.extend(assert_line(f) for f in formulas)
    if check:
        lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def check_symbols(f: FolFormula, decls: Declarations) -> None:
    """Reject formulas that mention undeclared tools, parameters, or
    projections before any text reaches an external solver."""

    def walk_term(t: Term) -> None:
        if isinstance(t, ToolConst):
            if t.name not in decls.tools:
                raise UndeclaredSymbol(f"tool {t.name!r} is not declared")
        elif isinstance(t, ArgOf):
            params = decls.tool_params.get(t.tool)
            if params is None or t.param not in {p for p, _ in params}:
                raise UndeclaredSymbol(
                    f"argument {t.tool}.{t.param} is not declared")
            walk_term(t.time)
        elif isinstance(t, StObs):
            if t.projection not in decls.projections:
                raise UndeclaredSymbol(
                    f"projection {t.projection!r} is not declared")
            for a in t.args:
                walk_term(a)
            walk_term(t.time)
        elif isinstance(t, ToolAt):
            walk_term(t.time)
        elif isinstance(t, OutAt):
            walk_term(t.time)
        elif isinstance(t, App):
            for a in t.args:
                walk_term(a)

    def walk(g: FolFormula) -> None:
        if isinstance(g, Rel):
            walk_term(g.lhs)
            walk_term(g.rhs)
        elif isinstance(g, TermAtom):
            walk_term(g.term)
        elif isinstance(g, FNot):
            walk(g.inner)
        elif isinstance(g, (FAnd, FOr)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, FImplies):
            walk(g.lhs)
            walk(g.rhs)
        elif isinstance(g, (FForall, FExists)):
            walk(g.body)

    walk(f)
