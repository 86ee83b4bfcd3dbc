"""Compliance checking: is a trace extendable to a word satisfying the policy?

A trace is *compliant* when the policy formula, the trace facts, and the
end-of-trace axioms are jointly satisfiable — i.e. some continuation of the
recorded prefix can still end without violating the policy.  Deciding that
question literally involves quantifiers over an unbounded timeline, which
solvers routinely fail to decide, so the checker layers three strategies:

1. **Bounded word search** (quantifier-free).  Ground the policy over the
   positions of the prefix plus a small extension window and ask for a model.
   Any model found is a real word, so satisfiable here always means
   Compliant.  Closed traces are decided exactly by this phase with a
   zero-length window.

2. **Unsatisfiability certificate.**  For policies in a syntactic fragment
   (no state/output reads, equality-only atoms, at most three temporal
   operators), a small-model argument shows that if any extension works,
   one within `EXTENSION_CERTIFICATE_BOUND` events works.  For those
   policies a bounded-window refutation is a proof of NonCompliant.

3. **Quantified fallback.**  Assert the full translation together with
   axioms pinning a first-end position (a conservative strengthening that
   preserves satisfiability) and let the solver try.  Unsat refutes; sat
   affirms; unknown is reported honestly.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

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
    Not,
    Or,
    Seq,
    Variable,
)
from .dsl.catalog import END_SAFE
from .dsl.validate import ValidatedSpec
from .dsl import SORT_STRING
from .fol import (
    Declarations,
    FForall,
    FImplies,
    FNot,
    FolFormula,
    Lit,
    OutAt,
    Rel,
    TimeLit,
    TimeTerm,
    TimeVar,
    ToolAt,
    ToolConst,
    Translator,
    conj,
    declarations_for,
    disj,
    encode_trace_and_axioms,
    end_axioms,
    event_facts,
    is_end,
    observation_facts,
    translate_spec,
)
from .smt.session import SAT, UNSAT, SatResult, SolverSession, open_session
from .trace import Trace, Value

COMPLIANT = "compliant"
NONCOMPLIANT = "noncompliant"
UNKNOWN_VERDICT = "unknown"

#: Extension window used both for bounded model search and for the
#: unsatisfiability certificate on eligible policies.
EXTENSION_CERTIFICATE_BOUND = 6

DEFAULT_TIMEOUT_MS = 10_000


@dataclass(frozen=True)
class ComplianceVerdict:
    status: str  # compliant / noncompliant / unknown
    reason: Optional[str] = None

    @property
    def is_compliant(self) -> bool:
        return self.status == COMPLIANT

    @property
    def is_noncompliant(self) -> bool:
        return self.status == NONCOMPLIANT

    @property
    def is_unknown(self) -> bool:
        return self.status == UNKNOWN_VERDICT


# --------------------------------------------------------------------------
# Certificate eligibility
# --------------------------------------------------------------------------


def _atoms_equality_only(c: Constraint) -> bool:
    if isinstance(c, Comparison):
        if c.rel != "==":
            return False
        return all(isinstance(op, (Constant, Variable)) for op in (c.lhs, c.rhs))
    if isinstance(c, BoolTerm):
        return isinstance(c.operand, (Constant, Variable))
    if isinstance(c, CNot):
        return _atoms_equality_only(c.inner)
    if isinstance(c, (CAnd, COr)):
        return _atoms_equality_only(c.lhs) and _atoms_equality_only(c.rhs)
    return False  # pragma: no cover


def _event_eligible(evc: EventConstraint) -> bool:
    return _atoms_equality_only(evc.constraint)


def certificate_eligible(spec: ValidatedSpec) -> tuple[bool, int]:
    """(eligible, temporal-operator count) for the bounded-refutation
    fragment: equality-only atoms over variables and constants, no state or
    output reads, at most three temporal operators."""

    count = 0
    ok = True

    def walk(f: Formula) -> None:
        nonlocal count, ok
        if isinstance(f, Not):
            walk(f.inner)
        elif isinstance(f, (And, Or)):
            walk(f.lhs)
            walk(f.rhs)
        elif isinstance(f, (Forall, Exists)):
            count += 1
            ok = ok and _event_eligible(f.event)
        elif isinstance(f, Before):
            count += 1
            ok = ok and _event_eligible(f.trigger) and _event_eligible(f.earlier)
        elif isinstance(f, After):
            count += 1
            ok = ok and _event_eligible(f.trigger) and _event_eligible(f.later)
        elif isinstance(f, Seq):
            count += 1
            ok = ok and _event_eligible(f.first) and _event_eligible(f.second)

    walk(spec.ast.root)
    return (ok and count <= 3, count)


# --------------------------------------------------------------------------
# Bounded (quantifier-free) word encoding
# --------------------------------------------------------------------------

FIRST_END = TimeVar("firstEnd")


def ground_spec(spec: ValidatedSpec, horizon: int) -> FolFormula:
    """The policy with every timeline quantifier expanded over positions
    0..horizon-1.  Sound for any word whose real events fit the horizon:
    end-marker positions match no event pattern, so padding is inert."""
    tr = Translator(spec)

    def ground(f: Formula) -> FolFormula:
        if isinstance(f, Not):
            return FNot(ground(f.inner))
        if isinstance(f, And):
            return conj([ground(f.lhs), ground(f.rhs)])
        if isinstance(f, Or):
            return disj([ground(f.lhs), ground(f.rhs)])
        if isinstance(f, Forall):
            parts = []
            for i in range(horizon):
                env: dict = {}
                m = tr.match(f.event, TimeLit(i), env)
                c = tr.constraint(f.event.constraint, env, TimeLit(i), {})
                parts.append(FImplies(m, c))
            return conj(parts)
        if isinstance(f, Exists):
            parts = []
            for i in range(horizon):
                env = {}
                m = tr.match(f.event, TimeLit(i), env)
                c = tr.constraint(f.event.constraint, env, TimeLit(i), {})
                parts.append(conj([m, c]))
            return disj(parts)
        if isinstance(f, (Before, After)):
            trigger = f.trigger
            partner = f.earlier if isinstance(f, Before) else f.later
            parts = []
            for i in range(horizon):
                env_t: dict = {}
                m_t = tr.match(trigger, TimeLit(i), env_t)
                g_t = tr.constraint(trigger.constraint, env_t, TimeLit(i), {})
                js = range(i) if isinstance(f, Before) else range(i + 1, horizon)
                wits = []
                for j in js:
                    env = dict(env_t)
                    m_p = tr.match(partner, TimeLit(j), env)
                    binder_times: dict[str, TimeTerm] = {}
                    if partner.binder:
                        binder_times[partner.binder] = TimeLit(j)
                    if trigger.binder:
                        binder_times[trigger.binder] = TimeLit(i)
                    c = tr.constraint(partner.constraint, env, TimeLit(i),
                                      binder_times)
                    wits.append(conj([m_p, c]))
                parts.append(FImplies(conj([m_t, g_t]), disj(wits)))
            return conj(parts)
        if isinstance(f, Seq):
            parts = []
            for j in range(horizon):
                env_2: dict = {}
                m_2 = tr.match(f.second, TimeLit(j), env_2)
                firsts = []
                for i in range(j):
                    env = dict(env_2)
                    m_1 = tr.match(f.first, TimeLit(i), env)
                    c_1 = tr.constraint(f.first.constraint, env, TimeLit(j), {})
                    c_2 = tr.constraint(f.second.constraint, env, TimeLit(j), {})
                    firsts.append(conj([m_1, c_1, c_2]))
                parts.append(conj([m_2, disj(firsts)]))
            return disj(parts)
        raise TypeError(f"not a formula: {f!r}")  # pragma: no cover

    return ground(spec.ast.root)


def word_shape(n: int, horizon: int,
               end_marker: Optional[str] = None) -> list[FolFormula]:
    """Constraints pinning the bounded word structure: a first-end position
    within the horizon, end markers from there on, real tools before."""
    e = FIRST_END
    out: list[FolFormula] = [
        Rel(">=", e, TimeLit(n)),
        Rel("<=", e, TimeLit(horizon - 1)),
        is_end(ToolAt(e)),
    ]
    for i in range(horizon):
        t = TimeLit(i)
        out.append(FImplies(Rel(">=", t, e), Rel("==", ToolAt(t), ToolAt(e))))
        out.append(FImplies(Rel("<", t, e), FNot(is_end(ToolAt(t)))))
    if end_marker is not None:
        out.append(Rel("==", e, TimeLit(n)))
        out.append(Rel("==", ToolAt(TimeLit(n)), ToolConst(end_marker)))
    return out


def bounded_word_formulas(spec: ValidatedSpec, trace: Trace,
                          extension: int) -> tuple[Declarations, list[FolFormula]]:
    """Facts + shape + grounded policy for `extension` free positions."""
    n = len(trace.events)
    horizon = n + extension + 1
    decls = declarations_for(trace.catalog, spec.projections)
    formulas: list[FolFormula] = []
    for i in range(n):
        formulas.extend(event_facts(trace, i))
        formulas.extend(observation_facts(trace, i, spec.projections))
    formulas.extend(word_shape(
        n, horizon, trace.end_marker() if trace.ended else None))
    formulas.append(ground_spec(spec, horizon))
    return decls, formulas


# --------------------------------------------------------------------------
# Session reuse for repeated checks of one policy
# --------------------------------------------------------------------------


class _BoundedSessionCache:
    """Live solver sessions keyed by policy/catalog identity and horizon.

    The horizon scaffold and the grounded policy — by far the largest part
    of each bounded query — depend only on the policy and the horizon, so a
    kept-open session lets repeated checks assert just their per-trace
    facts in a disposable frame.  Entries hold strong references to the
    policy and catalog, which keeps the identity keys stable; least
    recently used sessions are closed once the cache is full.
    """

    def __init__(self, capacity: int = 16):
        self._capacity = capacity
        self._entries: "OrderedDict[tuple, tuple]" = OrderedDict()
        self._lock = threading.Lock()

    @contextmanager
    def lease(self, spec: ValidatedSpec, catalog, horizon: int,
              timeout_ms: int, backend: str) -> Iterator[SolverSession]:
        key = (id(spec), id(catalog), horizon, timeout_ms, backend)
        with self._lock:
            entry = self._entries.pop(key, None)
            if entry is None:
                decls = declarations_for(catalog, spec.projections)
                session = open_session(decls, timeout_ms, backend)
                scaffold = word_shape(0, horizon)
                scaffold.append(ground_spec(spec, horizon))
                session.push_assert(scaffold)
                entry = (spec, catalog, session)
            try:
                yield entry[2]
            except BaseException:
                entry[2].close()
                raise
            self._entries[key] = entry
            while len(self._entries) > self._capacity:
                _, stale = self._entries.popitem(last=False)
                stale[2].close()

    def clear(self) -> None:
        with self._lock:
            for _, _, session in self._entries.values():
                session.close()
            self._entries.clear()


_BOUNDED_SESSIONS = _BoundedSessionCache()


def clear_session_cache() -> None:
    """Close all pooled solver sessions (safe to call at any point)."""
    _BOUNDED_SESSIONS.clear()


def _trace_facts(spec: ValidatedSpec, trace: Trace) -> list[FolFormula]:
    n = len(trace.events)
    facts: list[FolFormula] = []
    for i in range(n):
        facts.extend(event_facts(trace, i))
        facts.extend(observation_facts(trace, i, spec.projections))
    facts.append(Rel(">=", FIRST_END, TimeLit(n)))
    if trace.ended:
        facts.append(Rel("==", FIRST_END, TimeLit(n)))
        facts.append(Rel("==", ToolAt(TimeLit(n)), ToolConst(trace.end_marker())))
    return facts


def _bounded_query(spec: ValidatedSpec, trace: Trace, extension: int,
                   timeout_ms: int, backend: str) -> SatResult:
    """One bounded word search, reusing the pooled per-policy session."""
    horizon = len(trace.events) + extension + 1
    with _BOUNDED_SESSIONS.lease(spec, trace.catalog, horizon,
                                 timeout_ms, backend) as session:
        frame = session.push_assert(_trace_facts(spec, trace))
        try:
            return session.check_sat()
        finally:
            session.pop(frame)


# --------------------------------------------------------------------------
# Quantified fallback
# --------------------------------------------------------------------------


def first_end_axioms(n: int) -> list[FolFormula]:
    """Satisfiability-preserving strengthening of the end axioms: name the
    first end position explicitly so the solver can reason by cases."""
    e = FIRST_END
    t = TimeVar("tShape")
    return [
        Rel(">=", e, TimeLit(n)),
        is_end(ToolAt(e)),
        FForall(t, FImplies(Rel(">", t, e),
                            Rel("==", ToolAt(t), ToolAt(e)))),
        FForall(t, FImplies(conj([Rel(">=", t, TimeLit(0)),
                                  Rel("<", t, e)]),
                            FNot(is_end(ToolAt(t))))),
    ]


# --------------------------------------------------------------------------
# One-shot checking
# --------------------------------------------------------------------------


def _verdict_from(result: SatResult, *, sat_means: str,
                  unsat_means: Optional[str]) -> Optional[ComplianceVerdict]:
    if result.is_sat:
        return ComplianceVerdict(sat_means)
    if result.is_unsat and unsat_means is not None:
        return ComplianceVerdict(unsat_means)
    return None


def check_compliance(spec: ValidatedSpec, trace: Trace,
                     timeout_ms: int = DEFAULT_TIMEOUT_MS,
                     backend: str = "auto") -> ComplianceVerdict:
    """Decide whether the trace can still be completed within the policy."""
    n = len(trace.events)

    if trace.ended:
        result = _bounded_query(spec, trace, 0, timeout_ms, backend)
        if result.is_sat:
            return ComplianceVerdict(COMPLIANT)
        if result.is_unsat:
            return ComplianceVerdict(NONCOMPLIANT)
        return ComplianceVerdict(UNKNOWN_VERDICT, result.reason)

    result = _bounded_query(spec, trace, EXTENSION_CERTIFICATE_BOUND,
                            timeout_ms, backend)
    if result.is_sat:
        return ComplianceVerdict(COMPLIANT)
    eligible, _ = certificate_eligible(spec)
    if result.is_unsat and eligible:
        return ComplianceVerdict(NONCOMPLIANT)

    # Quantified fallback.
    decls, base = encode_trace_and_axioms(spec, trace)
    phi = translate_spec(spec)
    with open_session(decls, timeout_ms, backend) as session:
        session.push_assert([phi] + base + first_end_axioms(n))
        result = session.check_sat()
    if result.is_sat:
        return ComplianceVerdict(COMPLIANT)
    if result.is_unsat:
        return ComplianceVerdict(NONCOMPLIANT)
    return ComplianceVerdict(
        UNKNOWN_VERDICT,
        result.reason or "solver could not decide the quantified encoding")


def can_end_safely(spec: ValidatedSpec, trace: Trace,
                   timeout_ms: int = DEFAULT_TIMEOUT_MS,
                   backend: str = "auto") -> bool:
    """Would closing the trace with a safe end right now satisfy the policy?
    Decided exactly: the word is fully determined, no quantifiers remain."""
    if trace.ended:
        raise ValueError("trace already ended")
    n = len(trace.events)
    facts = _trace_facts(spec, trace)
    facts.append(Rel("==", FIRST_END, TimeLit(n)))
    facts.append(Rel("==", ToolAt(TimeLit(n)), ToolConst(END_SAFE)))
    with _BOUNDED_SESSIONS.lease(spec, trace.catalog, n + 1,
                                 timeout_ms, backend) as session:
        frame = session.push_assert(facts)
        try:
            return session.check_sat().is_sat
        finally:
            session.pop(frame)


def contract_artifacts(spec: ValidatedSpec, trace: Trace) -> str:
    """SMT-LIB text of the declarative encoding: quantified policy, trace
    facts, end axioms, and a satisfiability query."""
    from .smt.smtlib import script
    decls, base = encode_trace_and_axioms(spec, trace)
    return script(decls, [translate_spec(spec)] + base)


# --------------------------------------------------------------------------
# Incremental checking (one solver session per policy)
# --------------------------------------------------------------------------


class IncrementalComplianceChecker:
    """Per-policy solver session for generation-time gating.

    The grounded policy and word-shape scaffold are asserted once over a
    fixed horizon; each appended event contributes only its own ground
    facts in a fresh frame.  `candidate_ok` pushes a hypothetical event,
    keeps it when the word search succeeds, and unwinds it otherwise.

    Accepting requires an actual bounded model, so accepts are sound; a
    rejection means no completion exists within the horizon window.
    """

    def __init__(self, spec: ValidatedSpec, timeout_ms: int = DEFAULT_TIMEOUT_MS,
                 backend: str = "auto", horizon_cap: int = 48):
        self.spec = spec
        self.timeout_ms = timeout_ms
        self.backend = backend
        self.horizon_cap = horizon_cap
        self.decls = declarations_for(spec.catalog, spec.projections)
        self._n = 0
        self._event_frames: list[int] = []
        self._session: Optional[SolverSession] = None
        self._open()

    # -------------------------------------------------------------- session

    def _open(self) -> None:
        self._session = open_session(self.decls, self.timeout_ms, self.backend)
        scaffold = word_shape(0, self.horizon_cap)
        scaffold.append(ground_spec(self.spec, self.horizon_cap))
        self._session.push_assert(scaffold)

    def close(self) -> None:
        if self._session is not None:
            self._session.close()
            self._session = None

    def __enter__(self) -> "IncrementalComplianceChecker":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def stats(self):
        return self._session.stats

    @property
    def length(self) -> int:
        return self._n

    # --------------------------------------------------------------- events

    def _grow_if_needed(self) -> None:
        # Keep room for the event plus the certificate window and an end.
        if self._n + EXTENSION_CERTIFICATE_BOUND + 2 <= self.horizon_cap:
            return
        raise ValueError(
            f"trace length {self._n} exceeds the session horizon "
            f"{self.horizon_cap}; open a checker with a larger horizon_cap")

    def _facts_for(self, trace: Trace, index: int) -> list[FolFormula]:
        facts = event_facts(trace, index)
        facts.extend(observation_facts(trace, index, self.spec.projections))
        facts.append(Rel(">", FIRST_END, TimeLit(index)))
        return facts

    def append_event(self, trace: Trace) -> None:
        """Record the latest event of `trace` (whose prefix this checker has
        already seen) as a committed frame."""
        index = self._n
        if len(trace.events) <= index:
            raise ValueError("trace is shorter than the session history")
        self._grow_if_needed()
        frame = self._session.push_assert(self._facts_for(trace, index))
        self._event_frames.append(frame)
        self._n += 1

    def note_output(self, trace: Trace, index: int) -> None:
        """Commit the recorded output of event `index` as a solver fact.

        Must be called after the environment runs a tool whose result was
        stored on the trace; otherwise policies that read `output(...)` are
        judged with that value left unconstrained.
        """
        if index >= self._n:
            raise ValueError("cannot note output of an unrecorded event")
        text = trace.events[index].output
        if text is None:
            raise ValueError(f"event {index} has no recorded output")
        frame = self._session.push_assert([
            Rel("==", OutAt(TimeLit(index)), Lit(text, SORT_STRING)),
        ])
        self._event_frames.append(frame)

    def candidate_ok(self, trace: Trace) -> SatResult:
        """Check the trace whose last event is a candidate; keep the event's
        frame when satisfiable, unwind it otherwise."""
        index = self._n
        if len(trace.events) != index + 1:
            raise ValueError("candidate trace must extend the history by one event")
        self._grow_if_needed()
        frame = self._session.push_assert(self._facts_for(trace, index))
        result = self._session.check_sat()
        if result.is_sat:
            self._event_frames.append(frame)
            self._n += 1
        else:
            self._session.pop(frame)
        return result

    def check_current(self) -> SatResult:
        return self._session.check_sat()

    def can_end_safely(self) -> bool:
        """Exact: pins the end marker right after the recorded events."""
        frame = self._session.push_assert([
            Rel("==", FIRST_END, TimeLit(self._n)),
            Rel("==", ToolAt(TimeLit(self._n)), ToolConst(END_SAFE)),
        ])
        result = self._session.check_sat()
        self._session.pop(frame)
        return result.is_sat
