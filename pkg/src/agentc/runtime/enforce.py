"""Generation-time policy enforcement and the agent-session interpreter.

The pipeline has three layers:

* `gen_call` / `gen_call_reprompt` produce one candidate tool call from a
  generator and gate it: grammar extraction, per-argument type checking
  (with backtracking in the constrained flavor), state observation, and a
  solver compliance check of the extended trace.
* `safe_llm` loops candidates until one is admitted, the generator speaks
  prose (a request to stop), or the candidate budget runs out — in which
  case it degrades to an `emit_error` call carrying a diagnostic.
* `run_agent` drives a whole session as a small-step interpreter whose
  configuration cells (model output, pending invocation, tool output)
  determine the unique applicable rule.  An unguarded interpreter with the
  same shape — grammar and types only, no solver gate, prose always ends
  the session — serves as the comparison baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

from ..compliance import (
    DEFAULT_TIMEOUT_MS,
    IncrementalComplianceChecker,
    can_end_safely,
    check_compliance,
)
from ..dsl.validate import ValidatedSpec
from ..errors import ProjectionFailure, StepLimitExceeded
from ..grammar.toolcall import (
    parse_arg_text,
    parse_nonterminal,
    parse_toolcall,
    render_call,
)
from ..grammar.typecheck import type_check_and_completeness
from ..trace import (
    CurriedProjections,
    StateObservation,
    Trace,
    Value,
    append_event,
    evaluate_projections,
    record_output,
    set_end,
)
from .generator import ConstrainedGenerator
from .tokens import TokenLedger, count_tokens

EMIT_ERROR = "emit_error"

#: rejection kinds, as enumerated in the emit_error diagnostic
GRAMMATICAL = "grammatical"
TYPE_LEVEL = "type-level"
SOLVER_LEVEL = "solver-level"

#: final text of a session that had to stop on a policy-risk termination
ERROR_MARKER = "[session terminated: the agent could not continue safely]"


# --------------------------------------------------------------------------
# Outcomes and configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ToolOutcome:
    """A tool call to invoke.  `checked` records whether a solver session
    admitted it (false only for the emit_error degradation, which is always
    safe to run because the builtin matches no event pattern a policy could
    forbid only conditionally — it is still re-judged offline)."""

    name: str
    args: tuple[tuple[str, Value], ...]
    state_obs: tuple[StateObservation, ...] = ()
    checked: bool = True

    def args_dict(self) -> dict[str, Value]:
        return dict(self.args)


@dataclass(frozen=True)
class EndSafeOutcome:
    text: str


@dataclass(frozen=True)
class EndErrorOutcome:
    reason: str = "pending obligations forbid ending here"


GenOutcome = Union[ToolOutcome, EndSafeOutcome, EndErrorOutcome]


@dataclass(frozen=True)
class CandidateRejection:
    tool: str
    kind: str  # grammatical / type-level / solver-level
    detail: str


@dataclass
class SafeLlmConfig:
    iters: int = 4
    v_lim: int = 8
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    backend: str = "auto"
    #: Solver-session timeline length: must exceed the longest session's
    #: event count plus the search window.  Grounding two-event predicates
    #: is quadratic in this, so short sessions benefit from a small cap.
    horizon_cap: int = 48

    def __post_init__(self) -> None:
        if self.iters < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if self.v_lim < 1:
            raise ValueError(f"v_lim must be >= 1, got {self.v_lim}")


# --------------------------------------------------------------------------
# Solver gate
# --------------------------------------------------------------------------


class _Gate:
    """Admission check for a candidate-extended trace: an incremental
    session when one is supplied (the event frame is kept on success),
    otherwise a one-shot compliance check."""

    def __init__(self, spec: ValidatedSpec,
                 checker: Optional[IncrementalComplianceChecker],
                 timeout_ms: int, backend: str):
        self.spec = spec
        self.checker = checker
        self.timeout_ms = timeout_ms
        self.backend = backend

    def admits(self, candidate: Trace) -> tuple[bool, str]:
        if self.checker is not None:
            result = self.checker.candidate_ok(candidate)
            if result.is_sat:
                return True, "sat"
            why = "no compliant completion within the search window"
            if result.is_unknown:
                why = f"solver returned unknown ({result.reason})"
            return False, why
        verdict = check_compliance(self.spec, candidate,
                                   timeout_ms=self.timeout_ms,
                                   backend=self.backend)
        if verdict.is_compliant:
            return True, "compliant"
        return False, verdict.reason or verdict.status

    def end_ok(self, trace: Trace) -> bool:
        if self.checker is not None:
            return self.checker.can_end_safely()
        return can_end_safely(self.spec, trace, timeout_ms=self.timeout_ms,
                              backend=self.backend)


_EMPTY = ("", "", {}, (), False)


def _sanitize(text: str) -> str:
    """Make a message embeddable as a string argument (the call grammar has
    no escapes, so a double quote would truncate it)."""
    return text.replace('"', "'")


def _discard(generator, nt: str, ledger: Optional[TokenLedger]) -> None:
    """Backtrack over `nt`, charging the dropped text as generated output
    that was rejected (reject is a subset of output by construction)."""
    dropped = generator.backtrack(nt)
    if ledger is not None:
        n = count_tokens(dropped)
        ledger.output += n
        ledger.reject += n


# --------------------------------------------------------------------------
# Candidate generation
# --------------------------------------------------------------------------


def gen_call(prompt: str, generator: ConstrainedGenerator, trace: Trace,
             spec: ValidatedSpec, q_s: CurriedProjections, v_lim: int, *,
             checker: Optional[IncrementalComplianceChecker] = None,
             timeout_ms: int = DEFAULT_TIMEOUT_MS, backend: str = "auto",
             ledger: Optional[TokenLedger] = None,
             rejections: Optional[list[CandidateRejection]] = None):
    """One constrained candidate: (text, fn_name, fn_args, state_obs,
    complete).

    Prose (no tool name in the emission) returns the text with
    complete=False.  A rejected candidate — untypeable or incomplete
    arguments, projection failure, or solver refusal — is backtracked away
    and the empty tuple returned so the caller can retry on the same
    context.
    """
    gate = _Gate(spec, checker, timeout_ms, backend)

    def reject(tool: str, kind: str, detail: str) -> None:
        if rejections is not None:
            rejections.append(CandidateRejection(tool, kind, detail))

    def discard(nt: str) -> None:
        _discard(generator, nt, ledger)

    def emitted(text: str) -> None:
        if ledger is not None:
            ledger.output += count_tokens(text)

    generator.forward("name")
    text = generator.text()
    names = parse_nonterminal(text, "name")
    if not names:
        emitted(text)
        return (text, "", {}, (), False)
    fn_name = names[-1].text[1:-1]

    probe = type_check_and_completeness(fn_name, {}, spec.catalog)
    if probe.unknown_tool:
        # no signature to generate arguments against
        reject(fn_name, TYPE_LEVEL, "unknown tool")
        discard("name")
        return _EMPTY

    args: dict[str, Value] = {}
    complete = probe.signature_complete
    budget = v_lim
    while budget > 0 and not complete:
        budget -= 1  # one attempt spent, whatever its fate
        before = len(parse_nonterminal(generator.text(), "arg"))
        generator.forward("arg")
        spans = parse_nonterminal(generator.text(), "arg")
        if len(spans) <= before:
            # the new chunk did not contribute a parseable argument
            discard("arg")
            continue
        key, raw = parse_arg_text(spans[-1].text)
        verdict = type_check_and_completeness(
            fn_name, {key: raw}, spec.catalog).verdicts[0]
        if not verdict.ok:
            discard("arg")
            continue
        args[key] = verdict.value
        complete = type_check_and_completeness(
            fn_name, args, spec.catalog).signature_complete

    if not complete:
        reject(fn_name, TYPE_LEVEL,
               "signature still incomplete after the argument budget")
        discard("name")
        return _EMPTY

    try:
        sigma = evaluate_projections(q_s, fn_name, args)
    except ProjectionFailure as exc:
        reject(fn_name, SOLVER_LEVEL, f"state projection failed: {exc}")
        discard("name")
        return _EMPTY

    candidate = append_event(trace, fn_name, args, sigma)
    admitted, why = gate.admits(candidate)
    if admitted:
        accepted = generator.text()
        emitted(accepted)
        return (accepted, fn_name, args, sigma, True)
    reject(fn_name, SOLVER_LEVEL, why)
    discard("name")
    return _EMPTY


def gen_call_reprompt(prompt: str, generator, trace: Trace,
                      spec: ValidatedSpec, q_s: CurriedProjections, *,
                      checker: Optional[IncrementalComplianceChecker] = None,
                      timeout_ms: int = DEFAULT_TIMEOUT_MS,
                      backend: str = "auto",
                      ledger: Optional[TokenLedger] = None,
                      rejections: Optional[list[CandidateRejection]] = None,
                      attempt_index: int = 0):
    """One whole-completion candidate: same result shape as `gen_call`.

    Every attempt feeds the entire prompt back through the generator;
    attempts after the first are charged to the reprompt token category.
    """
    gate = _Gate(spec, checker, timeout_ms, backend)

    def reject(tool: str, kind: str, detail: str, text: str) -> None:
        if rejections is not None:
            rejections.append(CandidateRejection(tool, kind, detail))
        if ledger is not None:
            ledger.reject += count_tokens(text)

    text = generator.complete(prompt)
    generator.reset()  # retries re-feed the prompt; no context is retained
    if ledger is not None:
        if attempt_index == 0:
            ledger.input += count_tokens(prompt)
        else:
            ledger.reprompt += count_tokens(prompt)
        ledger.output += count_tokens(text)

    parsed = parse_toolcall(text)
    if parsed.parsed is None:
        return (text, "", {}, (), False)
    call = parsed.parsed

    result = type_check_and_completeness(call.name, call.args_dict(),
                                         spec.catalog)
    if not result.signature_complete:
        if result.unknown_tool:
            detail = "unknown tool"
        else:
            bad = "; ".join(f"{v.name}: {v.reason}" for v in result.failures())
            detail = bad or "missing required arguments"
        reject(call.name, TYPE_LEVEL, detail, text)
        return _EMPTY
    args = result.admitted_args()

    try:
        sigma = evaluate_projections(q_s, call.name, args)
    except ProjectionFailure as exc:
        reject(call.name, SOLVER_LEVEL, f"state projection failed: {exc}", text)
        return _EMPTY

    candidate = append_event(trace, call.name, args, sigma)
    admitted, why = gate.admits(candidate)
    if admitted:
        return (text, call.name, args, sigma, True)
    reject(call.name, SOLVER_LEVEL, why, text)
    return _EMPTY


# --------------------------------------------------------------------------
# Safe generation loop
# --------------------------------------------------------------------------


def _diagnostic(rejections: Sequence[CandidateRejection]) -> str:
    if not rejections:
        return _sanitize("no compliant tool call was generated "
                         "within the candidate budget")
    parts = [f"[{i}] {r.tool or '(unnamed)'}: {r.kind} rejection ({r.detail})"
             for i, r in enumerate(rejections, start=1)]
    return _sanitize("no compliant tool call was generated; candidates: "
                     + "; ".join(parts))


def _is_constrained(generator) -> bool:
    return hasattr(generator, "forward")


def safe_llm(prompt: str, generator, trace: Trace, spec: ValidatedSpec,
             q_s: CurriedProjections, config: SafeLlmConfig, *,
             checker: Optional[IncrementalComplianceChecker] = None,
             ledger: Optional[TokenLedger] = None,
             log: Optional[list] = None) -> GenOutcome:
    """Sample candidates until one is admitted.

    Prose short-circuits the loop: the session may end safely (EndSafe with
    the text) or may not (EndError).  Budget exhaustion degrades to an
    emit_error call whose message enumerates every rejection.
    """
    gate = _Gate(spec, checker, config.timeout_ms, config.backend)
    rejections: list[CandidateRejection] = []
    constrained = _is_constrained(generator)

    if constrained:
        generator.prompt(prompt)  # seeded exactly once; retries reuse context
        if ledger is not None:
            ledger.input += count_tokens(prompt)
    elif hasattr(generator, "begin_turn"):
        generator.begin_turn()

    def note(entry: dict) -> None:
        if log is not None:
            log.append(entry)

    for attempt in range(config.iters):
        seen = len(rejections)
        if constrained:
            text, name, args, sigma, complete = gen_call(
                prompt, generator, trace, spec, q_s, config.v_lim,
                checker=checker, timeout_ms=config.timeout_ms,
                backend=config.backend, ledger=ledger, rejections=rejections)
        else:
            text, name, args, sigma, complete = gen_call_reprompt(
                prompt, generator, trace, spec, q_s,
                checker=checker, timeout_ms=config.timeout_ms,
                backend=config.backend, ledger=ledger,
                rejections=rejections, attempt_index=attempt)
        for r in rejections[seen:]:
            note({"kind": "candidate", "tool": r.tool, "accepted": False,
                  "rejection": r.kind, "detail": r.detail})
        if complete:
            note({"kind": "candidate", "tool": name, "accepted": True})
            return ToolOutcome(name, tuple(args.items()), sigma)
        if text:
            # prose: the model wants to stop talking to tools
            if gate.end_ok(trace):
                note({"kind": "end", "safe": True})
                return EndSafeOutcome(text)
            note({"kind": "end", "safe": False})
            return EndErrorOutcome()
        # rejected candidate: retry on the same context

    msg = _diagnostic(rejections)
    note({"kind": "exhausted", "rejections": len(rejections)})
    return ToolOutcome(EMIT_ERROR, (("msg", msg),), (), checked=False)


# --------------------------------------------------------------------------
# Session interpreter
# --------------------------------------------------------------------------


#: executable tool: fn(state, **args) -> output string
Executable = Callable[..., str]


@dataclass
class AgentConfig:
    """Everything a session needs: the generator, the validated policy, the
    executable tools over a shared mutable state, and the state-projection
    map already curried with that state."""

    generator: object
    spec: ValidatedSpec
    executables: Mapping[str, Executable]
    q_s: CurriedProjections
    safe: SafeLlmConfig = field(default_factory=SafeLlmConfig)
    enforced: bool = True


@dataclass
class RunResult:
    final_text: str
    end: str  # "safe" | "error"
    trace: Trace
    log: list
    tokens: TokenLedger
    steps: int

    @property
    def rejected_candidates(self) -> int:
        return sum(1 for e in self.log
                   if e.get("kind") == "candidate" and not e.get("accepted"))

    def log_jsonl(self) -> str:
        return "\n".join(json.dumps(e) for e in self.log)


def _execute_tool(agent: AgentConfig, name: str,
                  args: Mapping[str, Value]) -> str:
    fn = agent.executables.get(name)
    if fn is None:
        return f"Error: tool {name} cannot be executed here"
    try:
        return str(fn(agent.q_s.state, **args))
    except Exception as exc:  # recorded, never fatal to the session
        return f"Error: {exc}"


def _infer_unguarded(prompt: str, agent: AgentConfig, trace: Trace,
                     ledger: TokenLedger, log: list) -> GenOutcome:
    """Baseline inference: grammar and argument types are respected (the
    trace cannot record ill-sorted values), but nothing is solver-checked
    and prose always ends the session."""
    generator = agent.generator
    spec = agent.spec
    if _is_constrained(generator):
        generator.prompt(prompt)
        ledger.input += count_tokens(prompt)
        generator.forward("name")
        text = generator.text()
        names = parse_nonterminal(text, "name")
        if not names:
            ledger.output += count_tokens(text)
            return EndSafeOutcome(text)
        fn_name = names[-1].text[1:-1]
        probe = type_check_and_completeness(fn_name, {}, spec.catalog)
        args: dict[str, Value] = {}
        complete = (not probe.unknown_tool) and probe.signature_complete
        budget = agent.safe.v_lim
        while not probe.unknown_tool and budget > 0 and not complete:
            budget -= 1
            before = len(parse_nonterminal(generator.text(), "arg"))
            generator.forward("arg")
            spans = parse_nonterminal(generator.text(), "arg")
            if len(spans) <= before:
                _discard(generator, "arg", ledger)
                continue
            key, raw = parse_arg_text(spans[-1].text)
            verdict = type_check_and_completeness(
                fn_name, {key: raw}, spec.catalog).verdicts[0]
            if not verdict.ok:
                _discard(generator, "arg", ledger)
                continue
            args[key] = verdict.value
            complete = type_check_and_completeness(
                fn_name, args, spec.catalog).signature_complete
        ledger.output += count_tokens(generator.text())
    else:
        if hasattr(generator, "begin_turn"):
            generator.begin_turn()
        text = generator.complete(prompt)
        ledger.input += count_tokens(prompt)
        ledger.output += count_tokens(text)
        parsed = parse_toolcall(text)
        if parsed.parsed is None:
            return EndSafeOutcome(text)
        call = parsed.parsed
        result = type_check_and_completeness(call.name, call.args_dict(),
                                             spec.catalog)
        if result.unknown_tool:
            return EndSafeOutcome(text)
        fn_name, args = call.name, result.admitted_args()

    try:
        sigma = evaluate_projections(agent.q_s, fn_name, args)
    except ProjectionFailure:
        sigma = ()  # the environment could not observe; proceed blind
    log.append({"kind": "candidate", "tool": fn_name, "accepted": True,
                "unguarded": True})
    return ToolOutcome(fn_name, tuple(args.items()), sigma, checked=False)


def run_agent(agent: AgentConfig, initial_prompt: str,
              step_limit: int) -> RunResult:
    """Drive one session to termination.

    Each loop iteration fires the single applicable rule, named in the log:
    inference (ask the generator / safe_llm for an outcome), invocation
    (record the admitted call on the trace and in the context), execution
    (run the tool, record its output), feedback (fold the output into the
    context), or one of the two terminations.  A tool that raises becomes
    an error-string output and the session continues.
    """
    if step_limit <= 0:
        raise ValueError(f"step_limit must be positive, got {step_limit}")

    suffix = "-AgC" if agent.enforced else ""
    ledger = TokenLedger()
    log: list = []
    trace = Trace(agent.spec.catalog)
    l_in = initial_prompt
    l_out: Optional[GenOutcome] = None
    t_in: Optional[tuple[str, dict]] = None
    t_out: Optional[str] = None
    checker: Optional[IncrementalComplianceChecker] = None
    if agent.enforced:
        checker = IncrementalComplianceChecker(
            agent.spec, timeout_ms=agent.safe.timeout_ms,
            backend=agent.safe.backend, horizon_cap=agent.safe.horizon_cap)

    def rule(name: str) -> None:
        log.append({"kind": "rule", "rule": name + suffix})

    steps = 0
    try:
        while True:
            steps += 1
            if steps > step_limit:
                raise StepLimitExceeded(
                    f"no termination within {step_limit} rule firings",
                    trace=trace)

            if l_out is None and t_in is None and t_out is None:
                rule("Infer")
                if agent.enforced:
                    l_out = safe_llm(l_in, agent.generator, trace, agent.spec,
                                     agent.q_s, agent.safe, checker=checker,
                                     ledger=ledger, log=log)
                else:
                    l_out = _infer_unguarded(l_in, agent, trace, ledger, log)
                continue

            if isinstance(l_out, ToolOutcome):
                rule("Invoke")
                trace = append_event(trace, l_out.name, l_out.args_dict(),
                                     l_out.state_obs)
                if checker is not None and not l_out.checked:
                    checker.append_event(trace)
                l_in = l_in + "\n" + render_call(l_out.name, l_out.args_dict())
                t_in = (l_out.name, l_out.args_dict())
                l_out = None
                continue

            if t_in is not None:
                rule("Execute")
                name, call_args = t_in
                output = _execute_tool(agent, name, call_args)
                trace = record_output(trace, output)
                if checker is not None:
                    checker.note_output(trace, len(trace.events) - 1)
                t_out = output
                t_in = None
                continue

            if t_out is not None:
                rule("Feedback")
                l_in = l_in + "\n<tool_response>" + t_out + "</tool_response>"
                t_out = None
                continue

            if isinstance(l_out, EndSafeOutcome):
                rule("Terminate")
                trace = set_end(trace, "safe")
                log.append({"kind": "tokens", **ledger.as_dict()})
                return RunResult(l_out.text, "safe", trace, log, ledger, steps)

            if isinstance(l_out, EndErrorOutcome):
                rule("Terminate-Err")
                trace = set_end(trace, "error")
                log.append({"kind": "tokens", **ledger.as_dict()})
                return RunResult(ERROR_MARKER, "error", trace, log, ledger,
                                 steps)

            raise AssertionError("no rule applicable")  # pragma: no cover
    finally:
        if checker is not None:
            checker.close()
