"""First-order encoding of specifications and traces.

A trace is modelled as a timeline indexed by non-negative integers.  Per
position there is a tool symbol (`toolAt`), one argument function per tool
parameter (`arg.<tool>.<param>`), a recorded output (`outAt`), and one state
function per projection (`st.<proj>`, keyed by the projection arguments and
the position at which the observation was taken).

Specifications compile to quantified formulas over the timeline; traces
compile to ground equalities; the end-of-trace discipline is a pair of
axioms (some position carries an end marker; end markers persist).  The
formula IR here is backend-neutral — `smt` compiles it either to native
z3 objects or to SMT-LIB 2 text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from .dsl.ast import (
    After,
    And,
    Before,
    BoolTerm,
    CAnd,
    CNot,
    COr,
    Comparison,
    Constant,
    Constraint,
    EventConstraint,
    Exists,
    Forall,
    Formula,
    FunctionApp,
    Not,
    Operand,
    Or,
    OutputRef,
    Seq,
    StateRef,
    Variable,
    Wildcard,
    SORT_BOOL,
    SORT_INT,
    SORT_REAL,
    SORT_STRING,
)
from .dsl.catalog import END_ERROR, END_MARKERS, END_SAFE, ProjectionCatalog, ToolCatalog
from .dsl.validate import ValidatedSpec
from .trace import Trace, Value, value_sort


# --------------------------------------------------------------------------
# Term / formula IR
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeVar:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Value
    sort: str


@dataclass(frozen=True)
class TimeLit:
    value: int


@dataclass(frozen=True)
class ToolConst:
    name: str


@dataclass(frozen=True)
class ToolAt:
    time: "TimeTerm"


@dataclass(frozen=True)
class ArgOf:
    tool: str
    param: str
    time: "TimeTerm"


@dataclass(frozen=True)
class OutAt:
    time: "TimeTerm"


@dataclass(frozen=True)
class StObs:
    projection: str
    args: tuple["Term", ...]
    time: "TimeTerm"


@dataclass(frozen=True)
class App:
    fn: str  # "+", "*", "strlen", "concat", "contains", "to_real"
    args: tuple["Term", ...]


TimeTerm = Union[TimeVar, TimeLit]
Term = Union[Lit, ToolConst, ToolAt, ArgOf, OutAt, StObs, App, TimeVar, TimeLit]


@dataclass(frozen=True)
class Rel:
    op: str  # "==", ">=", ">", "<=", "<"
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class TermAtom:
    term: Term  # must be bool-sorted


@dataclass(frozen=True)
class FNot:
    inner: "FolFormula"


@dataclass(frozen=True)
class FAnd:
    parts: tuple["FolFormula", ...]


@dataclass(frozen=True)
class FOr:
    parts: tuple["FolFormula", ...]


@dataclass(frozen=True)
class FImplies:
    lhs: "FolFormula"
    rhs: "FolFormula"


@dataclass(frozen=True)
class FForall:
    var: TimeVar
    body: "FolFormula"


@dataclass(frozen=True)
class FExists:
    var: TimeVar
    body: "FolFormula"


FolFormula = Union[Rel, TermAtom, FNot, FAnd, FOr, FImplies, FForall, FExists]

F_TRUE: FolFormula = FAnd(())
F_FALSE: FolFormula = FOr(())


def conj(parts: Sequence[FolFormula]) -> FolFormula:
    flat = [p for p in parts if p != F_TRUE]
    if not flat:
        return F_TRUE
    if len(flat) == 1:
        return flat[0]
    return FAnd(tuple(flat))


def disj(parts: Sequence[FolFormula]) -> FolFormula:
    flat = [p for p in parts if p != F_FALSE]
    if not flat:
        return F_FALSE
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


# --------------------------------------------------------------------------
# Declarations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Declarations:
    """Everything a backend must declare before asserting formulas."""

    tools: tuple[str, ...]  # enum constructors, end markers included
    tool_params: Mapping[str, tuple[tuple[str, str], ...]]  # tool -> ((param, sort), ...)
    projections: Mapping[str, tuple[tuple[str, ...], str]]  # name -> (arg sorts, return sort)

    def arg_fn_name(self, tool: str, param: str) -> str:
        return f"arg.{tool}.{param}"

    def st_fn_name(self, projection: str) -> str:
        return f"st.{projection}"

    def param_sort(self, tool: str, param: str) -> str:
        for name, sort in self.tool_params[tool]:
            if name == param:
                return sort
        raise KeyError(f"{tool}.{param}")


def declarations_for(catalog: ToolCatalog,
                     projections: ProjectionCatalog) -> Declarations:
    tools = tuple(catalog.names()) + END_MARKERS
    params = {
        sig.name: tuple((p.name, p.sort) for p in sig.params)
        for sig in catalog
    }
    projs = {
        sig.name: (tuple(p.sort for p in sig.params), sig.return_sort)
        for sig in projections
    }
    return Declarations(tools=tools, tool_params=params, projections=projs)


def term_sort(term: Term, decls: Declarations) -> str:
    if isinstance(term, Lit):
        return term.sort
    if isinstance(term, (TimeVar, TimeLit)):
        return SORT_INT
    if isinstance(term, ToolConst) or isinstance(term, ToolAt):
        return "tool"
    if isinstance(term, ArgOf):
        return decls.param_sort(term.tool, term.param)
    if isinstance(term, OutAt):
        return SORT_STRING
    if isinstance(term, StObs):
        return decls.projections[term.projection][1]
    if isinstance(term, App):
        if term.fn == "strlen":
            return SORT_INT
        if term.fn == "concat":
            return SORT_STRING
        if term.fn == "contains":
            return SORT_BOOL
        if term.fn == "to_real":
            return SORT_REAL
        # "+" / "*": real if any argument is real
        if any(term_sort(a, decls) == SORT_REAL for a in term.args):
            return SORT_REAL
        return SORT_INT
    raise TypeError(f"not a term: {term!r}")  # pragma: no cover


# --------------------------------------------------------------------------
# Specification translation
# --------------------------------------------------------------------------


class Translator:
    def __init__(self, spec: ValidatedSpec):
        self.spec = spec
        self.decls = declarations_for(spec.catalog, spec.projections)
        self._fresh = 0

    def fresh_time(self) -> TimeVar:
        v = TimeVar(f"t{self._fresh}")
        self._fresh += 1
        return v

    def coerce(self, lhs: Term, rhs: Term) -> tuple[Term, Term]:
        ls, rs = term_sort(lhs, self.decls), term_sort(rhs, self.decls)
        if ls == SORT_INT and rs == SORT_REAL:
            lhs = App("to_real", (lhs,))
        elif ls == SORT_REAL and rs == SORT_INT:
            rhs = App("to_real", (rhs,))
        return lhs, rhs

    def match(self, evc: EventConstraint, t: TimeVar,
              env: dict[str, Term]) -> FolFormula:
        """Tool-and-pattern match conjunct; extends env with fresh variable
        bindings.  A variable already bound (shared across the two events of
        one predicate) contributes an equality instead."""
        parts: list[FolFormula] = [Rel("==", ToolAt(t), ToolConst(evc.tool))]
        for pname, pat in evc.arg_patterns:
            arg = ArgOf(evc.tool, pname, t)
            if isinstance(pat, Wildcard):
                continue
            if isinstance(pat, Constant):
                sort = self.decls.param_sort(evc.tool, pname)
                value = float(pat.value) if (
                    sort == SORT_REAL and isinstance(pat.value, int)
                    and not isinstance(pat.value, bool)) else pat.value
                parts.append(Rel("==", arg, Lit(value, sort)))
            elif pat.name in env:
                parts.append(Rel("==", *self.coerce(arg, env[pat.name])))
            else:
                env[pat.name] = arg
        return conj(parts)

    def operand(self, op: Operand, env: Mapping[str, Term],
                trigger_time: TimeTerm,
                binder_times: Mapping[str, TimeTerm]) -> Term:
        if isinstance(op, Constant):
            return Lit(op.value, value_sort(op.value))
        if isinstance(op, Variable):
            return env[op.name]
        if isinstance(op, FunctionApp):
            args = tuple(self.operand(a, env, trigger_time, binder_times)
                         for a in op.args)
            if op.fn in ("+", "*") and any(
                    term_sort(a, self.decls) == SORT_REAL for a in args):
                args = tuple(
                    App("to_real", (a,))
                    if term_sort(a, self.decls) == SORT_INT else a
                    for a in args)
            return App(op.fn, args)
        if isinstance(op, OutputRef):
            return OutAt(binder_times[op.binder])
        if isinstance(op, StateRef):
            sig = self.spec.projections.get(op.projection)
            args = []
            for var, p in zip(op.args, sig.params):
                term = env[var]
                if (p.sort == SORT_REAL
                        and term_sort(term, self.decls) == SORT_INT):
                    term = App("to_real", (term,))
                args.append(term)
            return StObs(op.projection, tuple(args), trigger_time)
        raise TypeError(f"not an operand: {op!r}")  # pragma: no cover

    def constraint(self, c: Constraint, env: Mapping[str, Term],
                   trigger_time: TimeTerm,
                   binder_times: Mapping[str, TimeTerm]) -> FolFormula:
        if isinstance(c, Comparison):
            lhs = self.operand(c.lhs, env, trigger_time, binder_times)
            rhs = self.operand(c.rhs, env, trigger_time, binder_times)
            return Rel(c.rel, *self.coerce(lhs, rhs))
        if isinstance(c, BoolTerm):
            if c.operand == Constant(True):
                return F_TRUE
            if c.operand == Constant(False):
                return F_FALSE
            return TermAtom(self.operand(c.operand, env, trigger_time,
                                         binder_times))
        if isinstance(c, CNot):
            return FNot(self.constraint(c.inner, env, trigger_time,
                                        binder_times))
        if isinstance(c, CAnd):
            return conj([self.constraint(c.lhs, env, trigger_time, binder_times),
                         self.constraint(c.rhs, env, trigger_time, binder_times)])
        if isinstance(c, COr):
            return disj([self.constraint(c.lhs, env, trigger_time, binder_times),
                         self.constraint(c.rhs, env, trigger_time, binder_times)])
        raise TypeError(f"not a constraint: {c!r}")  # pragma: no cover

    # Quantifiers range over the non-negative timeline.

    def formula(self, f: Formula) -> FolFormula:
        if isinstance(f, Not):
            return FNot(self.formula(f.inner))
        if isinstance(f, And):
            return conj([self.formula(f.lhs), self.formula(f.rhs)])
        if isinstance(f, Or):
            return disj([self.formula(f.lhs), self.formula(f.rhs)])
        if isinstance(f, Forall):
            t = self.fresh_time()
            env: dict[str, Term] = {}
            match = self.match(f.event, t, env)
            body = self.constraint(f.event.constraint, env, t, {})
            return FForall(t, FImplies(conj([Rel(">=", t, TimeLit(0)), match]),
                                       body))
        if isinstance(f, Exists):
            t = self.fresh_time()
            env: dict[str, Term] = {}
            match = self.match(f.event, t, env)
            body = self.constraint(f.event.constraint, env, t, {})
            return FExists(t, conj([Rel(">=", t, TimeLit(0)), match, body]))
        if isinstance(f, Before):
            return self._demand(f.trigger, f.earlier, earlier=True)
        if isinstance(f, After):
            return self._demand(f.trigger, f.later, earlier=False)
        if isinstance(f, Seq):
            return self._seq(f.first, f.second)
        raise TypeError(f"not a formula: {f!r}")  # pragma: no cover

    def _demand(self, trigger: EventConstraint, partner: EventConstraint,
                earlier: bool) -> FolFormula:
        t = self.fresh_time()
        env: dict[str, Term] = {}
        match_t = self.match(trigger, t, env)
        guard = self.constraint(trigger.constraint, env, t, {})
        t2 = self.fresh_time()
        match_p = self.match(partner, t2, env)
        binder_times: dict[str, TimeTerm] = {}
        if partner.binder:
            binder_times[partner.binder] = t2
        if trigger.binder:
            binder_times[trigger.binder] = t
        body = self.constraint(partner.constraint, env, t, binder_times)
        order = Rel("<", t2, t) if earlier else Rel(">", t2, t)
        witness = FExists(t2, conj([Rel(">=", t2, TimeLit(0)), order,
                                    match_p, body]))
        return FForall(t, FImplies(
            conj([Rel(">=", t, TimeLit(0)), match_t, guard]), witness))

    def _seq(self, first: EventConstraint, second: EventConstraint) -> FolFormula:
        t2 = self.fresh_time()
        env: dict[str, Term] = {}
        match_2 = self.match(second, t2, env)
        t1 = self.fresh_time()
        match_1 = self.match(first, t1, env)
        # first's constraint sees only first's variables; enforced upstream.
        body_1 = self.constraint(first.constraint, env, t2, {})
        body_2 = self.constraint(second.constraint, env, t2, {})
        inner = FExists(t1, conj([Rel(">=", t1, TimeLit(0)),
                                  Rel("<", t1, t2), match_1, body_1, body_2]))
        return FExists(t2, conj([Rel(">=", t2, TimeLit(0)), match_2, inner]))


def translate_spec(spec: ValidatedSpec) -> FolFormula:
    """Compile a validated specification into a quantified timeline formula."""
    return Translator(spec).formula(spec.ast.root)


# --------------------------------------------------------------------------
# Trace encoding and end-of-trace axioms
# --------------------------------------------------------------------------


def _coerced_lit(value: Value, sort: str) -> Lit:
    if sort == SORT_REAL and isinstance(value, int) and not isinstance(value, bool):
        return Lit(float(value), sort)
    return Lit(value, sort)


def event_facts(trace: Trace, index: int) -> list[FolFormula]:
    """Ground equalities describing one position of a trace."""
    ev = trace.events[index]
    sig = trace.catalog.get(ev.tool)
    t = TimeLit(index)
    facts: list[FolFormula] = [Rel("==", ToolAt(t), ToolConst(ev.tool))]
    for name, value in ev.args:
        facts.append(Rel("==", ArgOf(ev.tool, name, t),
                         _coerced_lit(value, sig.param(name).sort)))
    if ev.output is not None:
        facts.append(Rel("==", OutAt(t), Lit(ev.output, SORT_STRING)))
    return facts


def observation_facts(trace: Trace, index: int,
                      projections: ProjectionCatalog) -> list[FolFormula]:
    """Ground equalities for the state observations taken at one position."""
    ev = trace.events[index]
    t = TimeLit(index)
    facts: list[FolFormula] = []
    for obs in ev.state_obs:
        sig = projections.get(obs.projection)
        by_name = obs.args_dict()
        args = tuple(_coerced_lit(by_name[p.name], p.sort) for p in sig.params)
        facts.append(Rel("==", StObs(obs.projection, args, t),
                         _coerced_lit(obs.value, sig.return_sort)))
    return facts


def is_end(term: Term) -> FolFormula:
    return disj([Rel("==", term, ToolConst(END_SAFE)),
                 Rel("==", term, ToolConst(END_ERROR))])


def end_axioms() -> list[FolFormula]:
    """Every word eventually ends, and end markers persist."""
    t = TimeVar("tEnd")
    eventually = FExists(t, conj([Rel(">=", t, TimeLit(0)),
                                  is_end(ToolAt(t))]))
    a, b = TimeVar("tA"), TimeVar("tB")
    persist = FForall(a, FForall(b, FImplies(
        conj([Rel(">=", a, TimeLit(0)), Rel(">", b, a), is_end(ToolAt(a))]),
        Rel("==", ToolAt(b), ToolAt(a)))))
    return [eventually, persist]


def encode_trace_and_axioms(
        spec: ValidatedSpec, trace: Trace,
) -> tuple[Declarations, list[FolFormula]]:
    """Ground facts for every position of the trace, plus the end axioms.

    If the trace is closed, the end marker is pinned at the position right
    after the last event.
    """
    decls = declarations_for(trace.catalog, spec.projections)
    formulas: list[FolFormula] = []
    for i in range(len(trace.events)):
        formulas.extend(event_facts(trace, i))
        formulas.extend(observation_facts(trace, i, spec.projections))
    formulas.extend(end_axioms())
    if trace.ended:
        formulas.append(Rel("==", ToolAt(TimeLit(len(trace.events))),
                            ToolConst(trace.end_marker())))
    return decls, formulas


# --------------------------------------------------------------------------
# IR pretty-printer (debugging / logs)
# --------------------------------------------------------------------------


def format_term(term: Term) -> str:
    if isinstance(term, Lit):
        if isinstance(term.value, bool):
            return "true" if term.value else "false"
        if isinstance(term.value, str):
            return '"' + term.value + '"'
        return repr(term.value)
    if isinstance(term, TimeLit):
        return str(term.value)
    if isinstance(term, TimeVar):
        return term.name
    if isinstance(term, ToolConst):
        return term.name
    if isinstance(term, ToolAt):
        return f"toolAt({format_term(term.time)})"
    if isinstance(term, ArgOf):
        return f"arg.{term.tool}.{term.param}({format_term(term.time)})"
    if isinstance(term, OutAt):
        return f"outAt({format_term(term.time)})"
    if isinstance(term, StObs):
        inner = ", ".join(format_term(a) for a in term.args)
        sep = ", " if inner else ""
        return f"st.{term.projection}({inner}{sep}{format_term(term.time)})"
    if isinstance(term, App):
        return f"{term.fn}({', '.join(format_term(a) for a in term.args)})"
    raise TypeError(repr(term))  # pragma: no cover


def format_formula(f: FolFormula) -> str:
    if isinstance(f, Rel):
        return f"({format_term(f.lhs)} {f.op} {format_term(f.rhs)})"
    if isinstance(f, TermAtom):
        return format_term(f.term)
    if isinstance(f, FNot):
        return f"!{format_formula(f.inner)}"
    if isinstance(f, FAnd):
        if not f.parts:
            return "true"
        return "(" + " & ".join(format_formula(p) for p in f.parts) + ")"
    if isinstance(f, FOr):
        if not f.parts:
            return "false"
        return "(" + " | ".join(format_formula(p) for p in f.parts) + ")"
    if isinstance(f, FImplies):
        return f"({format_formula(f.lhs)} => {format_formula(f.rhs)})"
    if isinstance(f, FForall):
        return f"(forall {f.var.name}. {format_formula(f.body)})"
    if isinstance(f, FExists):
        return f"(exists {f.var.name}. {format_formula(f.body)})"
    raise TypeError(repr(f))  # pragma: no cover
