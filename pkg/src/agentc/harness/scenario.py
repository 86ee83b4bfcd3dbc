"""Scenario loading, execution, offline re-checking, and metrics.

A scenario is a JSON document that fully determines one agent session: the
policy text, the tool catalog (inline signatures or the bundled retail
preset), which registered projections are visible, the world entities, a
scripted generator, the flavor to drive it in, harm markers, and optional
expected metrics.  `run_scenario` executes it deterministically and judges
the outcome offline — conformance through a freshly built checker over
every trace prefix, harm by subsequence matching — never trusting the
runtime's own verdicts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from ..compliance import (
    DEFAULT_TIMEOUT_MS,
    EXTENSION_CERTIFICATE_BOUND,
    check_compliance,
)
from ..dsl import parse_spec, validate_spec
from ..dsl.catalog import (
    ProjectionCatalog,
    ToolCatalog,
    ToolParam,
    ToolSig,
)
from ..dsl.ast import SORTS
from ..errors import AgentcError, ScenarioInvalid, StepLimitExceeded
from ..dsl.validate import ValidatedSpec
from ..runtime import (
    AgentConfig,
    RunResult,
    SafeLlmConfig,
    ScriptedConstrainedGenerator,
    ScriptedRepromptGenerator,
    TokenLedger,
    TurnScript,
    run_agent,
)
from ..trace import CurriedProjections, Trace, Value, build_projection_map
from .retail import (
    RETAIL_PROJECTION_EVALUATORS,
    RETAIL_PROJECTIONS,
    build_state,
    executables_for,
    retail_catalog,
)

MODES = ("constrained", "reprompt")

#: marker step: (tool name, {param: required constant value})
HarmStep = tuple[str, dict]
HarmMarker = tuple[HarmStep, ...]


@dataclass(frozen=True)
class Scenario:
    name: str
    spec_text: str
    spec: ValidatedSpec
    world: Optional[Mapping]
    generator: Mapping
    mode: str
    harm_markers: tuple[HarmMarker, ...]
    expected: Optional[Mapping]
    prompt: str
    iters: int
    v_lim: int
    step_limit: int


@dataclass(frozen=True)
class Metrics:
    sessions: int
    conformance: float
    harm: float
    rejected_candidates: int
    tokens: Mapping[str, int]

    def as_dict(self) -> dict:
        return {
            "sessions": self.sessions,
            "conformance": self.conformance,
            "harm": self.harm,
            "rejected_candidates": self.rejected_candidates,
            "tokens": dict(self.tokens),
        }


@dataclass
class ScenarioResult:
    scenario: Scenario
    seed: int
    enforced: bool
    run: Optional[RunResult]  # None when the step limit was exceeded
    trace: Trace
    log: list
    metrics: Metrics
    prefix_verdicts: list[str]

    @property
    def conformant(self) -> bool:
        return self.metrics.conformance == 1.0

    @property
    def harmed(self) -> bool:
        return self.metrics.harm > 0.0


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


def _fail(msg: str) -> None:
    raise ScenarioInvalid(msg)


def _build_catalog(tools) -> ToolCatalog:
    if tools == "mini-retail":
        return retail_catalog()
    if not isinstance(tools, list):
        _fail("'tools' must be \"mini-retail\" or a list of signatures")
    sigs = []
    for entry in tools:
        if not isinstance(entry, Mapping) or "name" not in entry:
            _fail(f"tool entry needs a 'name': {entry!r}")
        params = []
        for p in entry.get("params", ()):
            if not isinstance(p, Mapping) or "name" not in p or "sort" not in p:
                _fail(f"tool parameter needs 'name' and 'sort': {p!r}")
            if p["sort"] not in SORTS:
                _fail(f"unknown sort {p['sort']!r} in tool {entry['name']!r}")
            params.append(ToolParam(p["name"], p["sort"]))
        sigs.append(ToolSig(entry["name"], tuple(params)))
    return ToolCatalog(sigs)


def _build_projections(names) -> tuple[ProjectionCatalog, dict]:
    if names == "mini-retail":
        names = [sig.name for sig in RETAIL_PROJECTIONS]
    if not isinstance(names, list):
        _fail("'projections' must be \"mini-retail\" or a list of names")
    registry = {sig.name: sig for sig in RETAIL_PROJECTIONS}
    sigs, evaluators = [], {}
    for name in names:
        if name not in registry:
            _fail(f"projection {name!r} is not registered with the harness")
        sigs.append(registry[name])
        evaluators[name] = RETAIL_PROJECTION_EVALUATORS[name]
    return ProjectionCatalog(sigs), evaluators


def _check_generator(generator, mode: str) -> None:
    if not isinstance(generator, Mapping) or "turns" not in generator:
        _fail("'generator' must be an object with a 'turns' list")
    turns = generator["turns"]
    if not isinstance(turns, list) or not turns:
        _fail("'generator.turns' must be a non-empty list")
    for i, turn in enumerate(turns):
        if mode == "constrained":
            if not isinstance(turn, Mapping):
                _fail(f"turn {i}: constrained turns are objects "
                      "with 'names'/'args'")
            for cand in turn.get("names", ()):
                if isinstance(cand, str):
                    continue
                if isinstance(cand, Mapping) and isinstance(
                        cand.get("text"), str):
                    continue
                _fail(f"turn {i}: name candidate must be a tool name or "
                      f"a {{'text': ...}} prose entry, got {cand!r}")
            for pair in turn.get("args", ()):
                if (not isinstance(pair, Sequence) or isinstance(pair, str)
                        or len(pair) != 2 or not isinstance(pair[0], str)):
                    _fail(f"turn {i}: arg candidates are [name, value] "
                          f"pairs, got {pair!r}")
        else:
            if not (isinstance(turn, list)
                    and all(isinstance(c, str) for c in turn)):
                _fail(f"turn {i}: reprompt turns are lists of "
                      "completion strings")


def _build_markers(raw, catalog: ToolCatalog) -> tuple[HarmMarker, ...]:
    markers = []
    if not isinstance(raw, list):
        _fail("'harm_markers' must be a list of step sequences")
    for i, seq in enumerate(raw):
        if not isinstance(seq, list) or not seq:
            _fail(f"harm marker {i} must be a non-empty list of steps")
        steps = []
        for step in seq:
            if (not isinstance(step, Sequence) or isinstance(step, str)
                    or len(step) != 2):
                _fail(f"harm marker {i}: steps are [tool, {{arg: value}}] "
                      f"pairs, got {step!r}")
            tool, pins = step
            if tool not in catalog:
                _fail(f"harm marker {i} references unknown tool {tool!r}")
            if not isinstance(pins, Mapping):
                _fail(f"harm marker {i}: argument pins must be an object")
            steps.append((tool, dict(pins)))
        markers.append(tuple(steps))
    return tuple(markers)


def validate_scenario(doc: Mapping, name: str = "scenario") -> Scenario:
    """Check a scenario document and resolve it into runnable form."""
    if not isinstance(doc, Mapping):
        _fail("scenario must be a JSON object")
    for key in ("spec", "tools", "generator", "mode"):
        if key not in doc:
            _fail(f"scenario is missing required key {key!r}")
    mode = doc["mode"]
    if mode not in MODES:
        _fail(f"mode must be one of {MODES}, got {mode!r}")

    catalog = _build_catalog(doc["tools"])
    projections, _ = _build_projections(doc.get("projections", []))
    spec_text = doc["spec"]
    if not isinstance(spec_text, str):
        _fail("'spec' must be the policy text")
    try:
        spec = validate_spec(parse_spec(spec_text), catalog, projections)
    except AgentcError as exc:
        _fail(f"policy does not validate: {exc}")

    _check_generator(doc["generator"], mode)
    markers = _build_markers(doc.get("harm_markers", []), catalog)

    world = doc.get("state_seed")
    if world is not None and not isinstance(world, Mapping):
        _fail("'state_seed' must be an object of world entities")
    expected = doc.get("expected")
    if expected is not None and not isinstance(expected, Mapping):
        _fail("'expected' must be an object")

    return Scenario(
        name=str(doc.get("name", name)),
        spec_text=spec_text,
        spec=spec,
        world=world,
        generator=doc["generator"],
        mode=mode,
        harm_markers=markers,
        expected=expected,
        prompt=str(doc.get("prompt", "Assist the customer per policy.")),
        iters=int(doc.get("iters", 4)),
        v_lim=int(doc.get("v_lim", 6)),
        step_limit=int(doc.get("step_limit", 60)),
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioInvalid(f"cannot load scenario {path!r}: {exc}") from exc
    return validate_scenario(doc, name=path)


# --------------------------------------------------------------------------
# Execution
# --------------------------------------------------------------------------


def _build_generator(scenario: Scenario):
    turns = scenario.generator["turns"]
    if scenario.mode == "constrained":
        scripts = []
        for turn in turns:
            names = [dict(c) if isinstance(c, Mapping) else c
                     for c in turn.get("names", ())]
            args = [(p[0], p[1]) for p in turn.get("args", ())]
            scripts.append(TurnScript(names=names, args=args))
        return ScriptedConstrainedGenerator(scripts)
    return ScriptedRepromptGenerator(turns)


def _marker_step_matches(event, step: HarmStep) -> bool:
    tool, pins = step
    if event.tool != tool:
        return False
    args = event.args_dict()
    return all(args.get(k) == v for k, v in pins.items())


def marker_matches(trace: Trace, marker: HarmMarker) -> bool:
    """True when the marker's steps embed as a subsequence of the trace."""
    pos = 0
    for event in trace.events:
        if pos < len(marker) and _marker_step_matches(event, marker[pos]):
            pos += 1
    return pos == len(marker)


def trace_harmed(trace: Trace, markers: Sequence[HarmMarker]) -> bool:
    return any(marker_matches(trace, m) for m in markers)


def prefix_verdicts(spec: ValidatedSpec, trace: Trace,
                    timeout_ms: int = DEFAULT_TIMEOUT_MS,
                    backend: str = "auto") -> list[str]:
    """Offline verdicts for every open prefix, plus the ended trace when it
    ended safely (an error-ended session is judged on its prefixes only:
    the error stop is the enforcement refusing to proceed, not a policy
    claim about the completed word)."""
    verdicts = []
    for i in range(len(trace.events) + 1):
        prefix = replace(trace, events=trace.events[:i], end=None)
        verdicts.append(
            check_compliance(spec, prefix, timeout_ms=timeout_ms,
                             backend=backend).status)
    if trace.end == "safe":
        verdicts.append(
            check_compliance(spec, trace, timeout_ms=timeout_ms,
                             backend=backend).status)
    return verdicts


def session_metrics(log: Sequence, trace: Trace, spec: ValidatedSpec,
                    markers: Sequence[HarmMarker],
                    timeout_ms: int = DEFAULT_TIMEOUT_MS) -> tuple[Metrics, list[str]]:
    verdicts = prefix_verdicts(spec, trace, timeout_ms=timeout_ms)
    conformant = all(v == "compliant" for v in verdicts)
    harmed = trace_harmed(trace, markers)
    rejected = sum(1 for e in log
                   if isinstance(e, Mapping) and e.get("kind") == "candidate"
                   and not e.get("accepted"))
    tokens = TokenLedger()
    for e in log:
        if isinstance(e, Mapping) and e.get("kind") == "tokens":
            tokens.input += e.get("input", 0)
            tokens.reprompt += e.get("reprompt", 0)
            tokens.output += e.get("output", 0)
            tokens.reject += e.get("reject", 0)
    metrics = Metrics(
        sessions=1,
        conformance=1.0 if conformant else 0.0,
        harm=1.0 if harmed else 0.0,
        rejected_candidates=rejected,
        tokens=tokens.as_dict(),
    )
    return metrics, verdicts


def compute_metrics(logs: Sequence[Sequence], traces: Sequence[Trace],
                    spec: ValidatedSpec,
                    harm_markers: Sequence[HarmMarker],
                    timeout_ms: int = DEFAULT_TIMEOUT_MS) -> Metrics:
    """Aggregate judgment over sessions that share one policy."""
    per = [session_metrics(log, trace, spec, harm_markers,
                           timeout_ms=timeout_ms)[0]
           for log, trace in zip(logs, traces)]
    return aggregate_metrics(per)


def aggregate_metrics(per_session: Sequence[Metrics]) -> Metrics:
    n = sum(m.sessions for m in per_session)
    if n == 0:
        return Metrics(0, 1.0, 0.0, 0, TokenLedger().as_dict())
    tokens = TokenLedger()
    for m in per_session:
        tokens.input += m.tokens["input"]
        tokens.reprompt += m.tokens["reprompt"]
        tokens.output += m.tokens["output"]
        tokens.reject += m.tokens["reject"]
    return Metrics(
        sessions=n,
        conformance=sum(m.conformance * m.sessions for m in per_session) / n,
        harm=sum(m.harm * m.sessions for m in per_session) / n,
        rejected_candidates=sum(m.rejected_candidates for m in per_session),
        tokens=tokens.as_dict(),
    )


def run_scenario(scenario: Scenario, seed: int = 0, *,
                 enforced: bool = True,
                 timeout_ms: int = DEFAULT_TIMEOUT_MS,
                 backend: str = "auto") -> ScenarioResult:
    """Execute one scenario session end to end, then judge it offline.

    The seed is recorded for reproducibility bookkeeping; scripted
    generators and the environment are already fully deterministic.
    """
    state = build_state(scenario.world)
    catalog = scenario.spec.catalog
    _, evaluators = _build_projections(
        list(scenario.spec.projections.names()))
    q_s = CurriedProjections(build_projection_map(scenario.spec),
                             evaluators, state)
    agent = AgentConfig(
        generator=_build_generator(scenario),
        spec=scenario.spec,
        executables=executables_for(catalog),
        q_s=q_s,
        safe=SafeLlmConfig(iters=scenario.iters, v_lim=scenario.v_lim,
                           timeout_ms=timeout_ms, backend=backend,
                           # the step limit caps events at ~1 per 3 rule
                           # firings, so this horizon can never be outgrown
                           horizon_cap=(scenario.step_limit // 3
                                        + EXTENSION_CERTIFICATE_BOUND + 2)),
        enforced=enforced,
    )
    run: Optional[RunResult] = None
    try:
        run = run_agent(agent, scenario.prompt, scenario.step_limit)
        trace, log = run.trace, run.log
    except StepLimitExceeded as exc:
        trace, log = exc.trace, [{"kind": "step-limit"}]
    metrics, verdicts = session_metrics(
        log, trace, scenario.spec, scenario.harm_markers,
        timeout_ms=timeout_ms)
    return ScenarioResult(
        scenario=scenario, seed=seed, enforced=enforced, run=run,
        trace=trace, log=log, metrics=metrics, prefix_verdicts=verdicts)
