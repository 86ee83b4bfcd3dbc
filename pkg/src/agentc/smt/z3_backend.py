"""In-process z3 backend.

Each session owns a fresh z3 context, so enumerated sorts and function
symbols never collide across sessions and closing a session frees its state.
"""

from __future__ import annotations

from functools import reduce
from typing import Mapping

from ..dsl.ast import SORT_BOOL, SORT_INT, SORT_REAL, SORT_STRING
from ..errors import BackendUnavailable, SolverError, UndeclaredSymbol
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
from .session import SAT, UNKNOWN, UNSAT, SatResult, SolverSession

try:
    import z3
except ImportError:  # pragma: no cover
    z3 = None


class Z3Session(SolverSession):
    def __init__(self, declarations: Declarations, timeout_ms: int):
        if z3 is None:  # pragma: no cover
            raise BackendUnavailable("z3 python bindings are not installed")
        super().__init__(declarations, timeout_ms)
        self.ctx = z3.Context()
        self.solver = z3.Solver(ctx=self.ctx)
        self.solver.set(timeout=timeout_ms)
        self._build_symbols(declarations)
        self._time_vars: dict[str, object] = {}

    # ------------------------------------------------------------- symbols

    def _sort(self, name: str):
        if name == SORT_INT:
            return z3.IntSort(self.ctx)
        if name == SORT_REAL:
            return z3.RealSort(self.ctx)
        if name == SORT_STRING:
            return z3.StringSort(self.ctx)
        if name == SORT_BOOL:
            return z3.BoolSort(self.ctx)
        raise SolverError(f"unknown sort {name!r}")  # pragma: no cover

    def _build_symbols(self, decls: Declarations) -> None:
        self.tool_sort, consts = z3.EnumSort(
            "Tool", list(decls.tools), ctx=self.ctx)
        self.tool_consts: Mapping[str, object] = dict(zip(decls.tools, consts))
        self.tool_at = z3.Function(
            "toolAt", z3.IntSort(self.ctx), self.tool_sort)
        self.out_at = z3.Function(
            "outAt", z3.IntSort(self.ctx), z3.StringSort(self.ctx))
        self.arg_fns: dict[tuple[str, str], object] = {}
        for tool, params in decls.tool_params.items():
            for pname, psort in params:
                self.arg_fns[(tool, pname)] = z3.Function(
                    decls.arg_fn_name(tool, pname),
                    z3.IntSort(self.ctx), self._sort(psort))
        self.st_fns: dict[str, object] = {}
        for proj, (arg_sorts, ret) in decls.projections.items():
            domain = [self._sort(s) for s in arg_sorts]
            domain.append(z3.IntSort(self.ctx))
            self.st_fns[proj] = z3.Function(
                decls.st_fn_name(proj), *domain, self._sort(ret))

    # --------------------------------------------------------------- terms

    def _time_var(self, name: str):
        if name not in self._time_vars:
            self._time_vars[name] = z3.Int(name, self.ctx)
        return self._time_vars[name]

    def term(self, t: Term):
        if isinstance(t, Lit):
            if t.sort == SORT_BOOL:
                return z3.BoolVal(bool(t.value), self.ctx)
            if t.sort == SORT_STRING:
                return z3.StringVal(t.value, self.ctx)
            if t.sort == SORT_REAL:
                return z3.RealVal(t.value, self.ctx)
            return z3.IntVal(t.value, self.ctx)
        if isinstance(t, TimeLit):
            return z3.IntVal(t.value, self.ctx)
        if isinstance(t, TimeVar):
            return self._time_var(t.name)
        if isinstance(t, ToolConst):
            try:
                return self.tool_consts[t.name]
            except KeyError:
                raise UndeclaredSymbol(f"tool {t.name!r} is not declared")
        if isinstance(t, ToolAt):
            return self.tool_at(self.term(t.time))
        if isinstance(t, ArgOf):
            try:
                fn = self.arg_fns[(t.tool, t.param)]
            except KeyError:
                raise UndeclaredSymbol(
                    f"argument {t.tool}.{t.param} is not declared")
            return fn(self.term(t.time))
        if isinstance(t, OutAt):
            return self.out_at(self.term(t.time))
        if isinstance(t, StObs):
            try:
                fn = self.st_fns[t.projection]
            except KeyError:
                raise UndeclaredSymbol(
                    f"projection {t.projection!r} is not declared")
            args = [self.term(a) for a in t.args]
            args.append(self.term(t.time))
            return fn(*args)
        if isinstance(t, App):
            args = [self.term(a) for a in t.args]
            if t.fn == "+":
                return reduce(lambda a, b: a + b, args)
            if t.fn == "*":
                return reduce(lambda a, b: a * b, args)
            if t.fn == "strlen":
                return z3.Length(args[0])
            if t.fn == "concat":
                return z3.Concat(args[0], args[1])
            if t.fn == "contains":
                return z3.Contains(args[0], args[1])
            if t.fn == "to_real":
                return z3.ToReal(args[0])
            raise SolverError(f"unknown function {t.fn!r}")  # pragma: no cover
        raise SolverError(f"not a term: {t!r}")  # pragma: no cover

    def formula(self, f: FolFormula):
        if isinstance(f, Rel):
            lhs, rhs = self.term(f.lhs), self.term(f.rhs)
            if f.op == "==":
                return lhs == rhs
            if f.op == ">=":
                return lhs >= rhs
            if f.op == ">":
                return lhs > rhs
            if f.op == "<=":
                return lhs <= rhs
            return lhs < rhs
        if isinstance(f, TermAtom):
            return self.term(f.term)
        if isinstance(f, FNot):
            return z3.Not(self.formula(f.inner))
        if isinstance(f, FAnd):
            if not f.parts:
                return z3.BoolVal(True, self.ctx)
            return z3.And([self.formula(p) for p in f.parts])
        if isinstance(f, FOr):
            if not f.parts:
                return z3.BoolVal(False, self.ctx)
            return z3.Or([self.formula(p) for p in f.parts])
        if isinstance(f, FImplies):
            return z3.Implies(self.formula(f.lhs), self.formula(f.rhs))
        if isinstance(f, FForall):
            return z3.ForAll([self._time_var(f.var.name)],
                             self.formula(f.body))
        if isinstance(f, FExists):
            return z3.Exists([self._time_var(f.var.name)],
                             self.formula(f.body))
        raise SolverError(f"not a formula: {f!r}")  # pragma: no cover

    # ---------------------------------------------------------- primitives

    def _push(self) -> None:
        self.solver.push()

    def _pop(self) -> None:
        self.solver.pop()

    def _assert(self, formula: FolFormula) -> None:
        try:
            self.solver.add(self.formula(formula))
        except UndeclaredSymbol:
            raise
        except z3.Z3Exception as exc:  # pragma: no cover
            raise SolverError(f"z3 rejected assertion: {exc}")

    def _check(self) -> SatResult:
        try:
            res = self.solver.check()
        except z3.Z3Exception as exc:  # pragma: no cover
            raise SolverError(f"z3 check failed: {exc}")
        if res == z3.sat:
            return SatResult(SAT)
        if res == z3.unsat:
            return SatResult(UNSAT)
        return SatResult(UNKNOWN, self.solver.reason_unknown())

    def _close(self) -> None:
        self.solver = None
        self.ctx = None
