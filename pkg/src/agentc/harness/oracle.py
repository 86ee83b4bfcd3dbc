"""Brute-force compliance oracle.

Evaluates a validated specification over a finite, completed trace by direct
structural recursion (quantifiers iterate positions; the two-event predicates
compare positions pairwise), and decides compliance of an open trace by
enumerating every extension up to a bound over a finite value domain.

This module is the independent reference the solver-backed checker is tested
against.  It is deliberately naive: no solver, no normalization tricks, just
the defining semantics.  Its incompleteness is explicit — extensions longer
than the bound, or using values outside the supplied domain, are not explored;
callers choose bounds that suffice for their spec family.
"""

from __future__ import annotations

from itertools import product
from typing import Callable, Iterable, Mapping, Optional, Sequence

from ..dsl.ast import (
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
)
from ..dsl.validate import ValidatedSpec
from ..errors import AgentcError, DomainTooLarge
from ..trace import Event, StateObservation, Trace, Value, value_fits


class OutputUnavailable(AgentcError):
    """The word references an event output that was never recorded and no
    way to compute one was supplied."""


# --------------------------------------------------------------------------
# Word evaluation
# --------------------------------------------------------------------------


def _values_equal(a: Value, b: Value) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, str) or isinstance(b, str):
        return isinstance(a, str) and isinstance(b, str) and a == b
    return float(a) == float(b)


def _match(evc: EventConstraint, event: Event) -> Optional[dict[str, Value]]:
    """Try to match an event against a pattern; returns variable bindings."""
    if evc.tool != event.tool:
        return None
    args = event.args_dict()
    env: dict[str, Value] = {}
    for pname, pat in evc.arg_patterns:
        if pname not in args:
            return None
        val = args[pname]
        if isinstance(pat, Wildcard):
            continue
        if isinstance(pat, Constant):
            if not _values_equal(pat.value, val):
                return None
        else:
            if pat.name in env and not _values_equal(env[pat.name], val):
                return None
            env[pat.name] = val
    return env


def _merge(a: Mapping[str, Value], b: Mapping[str, Value]) -> Optional[dict[str, Value]]:
    merged = dict(a)
    for k, v in b.items():
        if k in merged and not _values_equal(merged[k], v):
            return None
        merged[k] = v
    return merged


class _Evaluator:
    def __init__(self, spec: ValidatedSpec, events: Sequence[Event]):
        self.spec = spec
        self.events = events

    # ---------------------------------------------------------- constraints

    def operand(self, op: Operand, env: Mapping[str, Value],
                trigger: Event, bound: Mapping[str, Event]) -> Value:
        if isinstance(op, Constant):
            return op.value
        if isinstance(op, Variable):
            return env[op.name]
        if isinstance(op, FunctionApp):
            vals = [self.operand(a, env, trigger, bound) for a in op.args]
            if op.fn == "+":
                return sum(vals)
            if op.fn == "*":
                out: Value = 1
                for v in vals:
                    out = out * v
                return out
            if op.fn == "strlen":
                return len(vals[0])
            if op.fn == "concat":
                return vals[0] + vals[1]
            if op.fn == "contains":
                return vals[1] in vals[0]
            raise TypeError(f"unknown function {op.fn!r}")  # pragma: no cover
        if isinstance(op, OutputRef):
            event = bound[op.binder]
            if event.output is None:
                raise OutputUnavailable(
                    f"output({op.binder}) queried but the matched event "
                    f"({event.tool}) has no recorded output")
            return event.output
        if isinstance(op, StateRef):
            sig = self.spec.projections.get(op.projection)
            proj_args = {p.name: env[v] for v, p in zip(op.args, sig.params)}
            return trigger.observation(op.projection, proj_args)
        raise TypeError(f"not an operand: {op!r}")  # pragma: no cover

    def constraint(self, c: Constraint, env: Mapping[str, Value],
                   trigger: Event, bound: Mapping[str, Event]) -> bool:
        if isinstance(c, Comparison):
            lhs = self.operand(c.lhs, env, trigger, bound)
            rhs = self.operand(c.rhs, env, trigger, bound)
            if c.rel == "==":
                return _values_equal(lhs, rhs)
            if c.rel == ">=":
                return lhs >= rhs
            if c.rel == ">":
                return lhs > rhs
            if c.rel == "<=":
                return lhs <= rhs
            return lhs < rhs
        if isinstance(c, BoolTerm):
            return bool(self.operand(c.operand, env, trigger, bound))
        if isinstance(c, CNot):
            return not self.constraint(c.inner, env, trigger, bound)
        if isinstance(c, CAnd):
            return (self.constraint(c.lhs, env, trigger, bound)
                    and self.constraint(c.rhs, env, trigger, bound))
        if isinstance(c, COr):
            return (self.constraint(c.lhs, env, trigger, bound)
                    or self.constraint(c.rhs, env, trigger, bound))
        raise TypeError(f"not a constraint: {c!r}")  # pragma: no cover

    # ------------------------------------------------------------- formulas

    def formula(self, f: Formula) -> bool:
        if isinstance(f, Not):
            return not self.formula(f.inner)
        if isinstance(f, And):
            return self.formula(f.lhs) and self.formula(f.rhs)
        if isinstance(f, Or):
            return self.formula(f.lhs) or self.formula(f.rhs)
        if isinstance(f, Forall):
            for ev in self.events:
                env = _match(f.event, ev)
                if env is not None and not self.constraint(
                        f.event.constraint, env, ev, {}):
                    return False
            return True
        if isinstance(f, Exists):
            for ev in self.events:
                env = _match(f.event, ev)
                if env is not None and self.constraint(
                        f.event.constraint, env, ev, {}):
                    return True
            return False
        if isinstance(f, Before):
            return self._precedence(f.trigger, f.earlier, earlier=True)
        if isinstance(f, After):
            return self._precedence(f.trigger, f.later, earlier=False)
        if isinstance(f, Seq):
            return self._sequence(f.first, f.second)
        raise TypeError(f"not a formula node: {f!r}")  # pragma: no cover

    def _precedence(self, trigger: EventConstraint, partner: EventConstraint,
                    earlier: bool) -> bool:
        """Shared shape of the two universal two-event predicates: every
        satisfying trigger occurrence needs a partner on the required side."""
        n = len(self.events)
        for t, ev in enumerate(self.events):
            env = _match(trigger, ev)
            if env is None:
                continue
            bound_t = {trigger.binder: ev} if trigger.binder else {}
            if not self.constraint(trigger.constraint, env, ev, bound_t):
                continue
            positions = range(t) if earlier else range(t + 1, n)
            found = False
            for t2 in positions:
                env2 = _match(partner, self.events[t2])
                if env2 is None:
                    continue
                joint = _merge(env, env2)
                if joint is None:
                    continue
                bound = dict(bound_t)
                if partner.binder:
                    bound[partner.binder] = self.events[t2]
                # state observations are read at the trigger's time
                if self.constraint(partner.constraint, joint, ev, bound):
                    found = True
                    break
            if not found:
                return False
        return True

    def _sequence(self, first: EventConstraint, second: EventConstraint) -> bool:
        n = len(self.events)
        for t2 in range(n):
            env2 = _match(second, self.events[t2])
            if env2 is None:
                continue
            for t in range(t2):
                env1 = _match(first, self.events[t])
                if env1 is None:
                    continue
                joint = _merge(env1, env2)
                if joint is None:
                    continue
                if not self.constraint(first.constraint, env1,
                                       self.events[t2], {}):
                    continue
                if self.constraint(second.constraint, joint,
                                   self.events[t2], {}):
                    return True
        return False


def satisfies_word(spec: ValidatedSpec, events: Sequence[Event]) -> bool:
    """Direct evaluation of the specification over one completed word."""
    return _Evaluator(spec, events).formula(spec.ast.root)


# --------------------------------------------------------------------------
# Bounded-extension compliance
# --------------------------------------------------------------------------


Letter = tuple[str, dict[str, Value]]


def extension_letters(spec: ValidatedSpec,
                      value_domain: Iterable[Value]) -> list[Letter]:
    """Every (tool, argument assignment) the search may append.  Only tools
    the specification mentions matter: events of other tools match no pattern
    and therefore never change any verdict."""
    domain = list(value_domain)
    letters: list[Letter] = []
    for tool in sorted(spec.tool_refs):
        sig = spec.catalog.get(tool)
        choices = []
        for p in sig.params:
            fitting = [v for v in domain if value_fits(v, p.sort)]
            choices.append(fitting)
        if any(not c for c in choices):
            continue  # a parameter has no domain values of its sort
        for combo in product(*choices):
            letters.append((tool, {p.name: v for p, v in zip(sig.params, combo)}))
    return letters


def interpret_compliance_oracle(
        spec: ValidatedSpec,
        trace: Trace,
        extension_bound: int,
        value_domain: Iterable[Value],
        *,
        observe_fn: Optional[Callable[[str, Mapping[str, Value]],
                                      tuple[StateObservation, ...]]] = None,
        output_fn: Optional[Callable[[str, Mapping[str, Value]], str]] = None,
        cap: int = 10 ** 6,
) -> bool:
    """True iff some extension of ≤ `extension_bound` events (drawn from the
    spec's tools with arguments over `value_domain`), followed by a safe end
    marker, satisfies the specification.

    `observe_fn`/`output_fn` let a caller supply environment-computed state
    observations and outputs for the hypothetical extension events; without
    them, extension events carry no observations and no outputs, which only
    matters for specifications that actually read them.

    Raises DomainTooLarge when the enumeration would exceed `cap` words.
    """
    if extension_bound < 0:
        raise ValueError("extension_bound must be >= 0")
    if trace.ended:
        return satisfies_word(spec, trace.events)

    letters = extension_letters(spec, value_domain)
    evaluated = 0

    def make_event(tool: str, args: dict[str, Value]) -> Event:
        obs = observe_fn(tool, args) if observe_fn else ()
        out = output_fn(tool, args) if output_fn else None
        return Event(tool=tool, args=tuple(args.items()),
                     state_obs=tuple(obs), output=out)

    def search(events: list[Event], remaining: int) -> bool:
        nonlocal evaluated
        evaluated += 1
        if evaluated > cap:
            raise DomainTooLarge(
                f"extension enumeration exceeded {cap} completed traces")
        if satisfies_word(spec, events):
            return True
        if remaining == 0:
            return False
        for tool, args in letters:
            events.append(make_event(tool, args))
            if search(events, remaining - 1):
                events.pop()
                return True
            events.pop()
        return False

    return search(list(trace.events), extension_bound)
