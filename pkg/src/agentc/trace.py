"""Execution traces: events, end markers, state observations, and the
spec-derived projection map.

Traces are value-semantic: append/record return new traces and never mutate,
so a reference captured before an update stays valid.  A trace carries the
tool catalog it was built against, which lets appends check names and sorts
locally and lets serialization round-trip without extra context.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Union

from .dsl.ast import (
    After,
    Before,
    Constraint,
    EventConstraint,
    Exists,
    Forall,
    Formula,
    Not,
    Seq,
    StateRef,
    Variable,
    constraint_operands,
    operand_refs,
    SORT_BOOL,
    SORT_INT,
    SORT_REAL,
    SORT_STRING,
)
from .dsl.catalog import END_ERROR, END_SAFE, ToolCatalog
from .dsl.validate import ValidatedSpec
from .errors import (
    EmptyTrace,
    OutputAlreadySet,
    ProjectionFailure,
    SortMismatch,
    TraceEnded,
    TraceFormatError,
    UnboundProjectionArg,
)

#: runtime representation of specification values
Value = Union[bool, int, float, str]


def value_sort(v: Value) -> str:
    if isinstance(v, bool):
        return SORT_BOOL
    if isinstance(v, int):
        return SORT_INT
    if isinstance(v, float):
        return SORT_REAL
    if isinstance(v, str):
        return SORT_STRING
    raise TypeError(f"not a specification value: {v!r}")


def value_fits(v: Value, sort: str) -> bool:
    vs = value_sort(v)
    return vs == sort or (vs == SORT_INT and sort == SORT_REAL)


# --------------------------------------------------------------------------
# Events and traces
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StateObservation:
    """One projection evaluated at concrete arguments, captured immediately
    before its event's call."""

    projection: str
    args: tuple[tuple[str, Value], ...]
    value: Value

    def args_dict(self) -> dict[str, Value]:
        return dict(self.args)


@dataclass(frozen=True)
class Event:
    tool: str
    args: tuple[tuple[str, Value], ...]
    state_obs: tuple[StateObservation, ...] = ()
    output: Union[str, None] = None

    def args_dict(self) -> dict[str, Value]:
        return dict(self.args)

    def observation(self, projection: str, args: Mapping[str, Value]) -> Value:
        wanted = tuple(args.items())
        for obs in self.state_obs:
            if obs.projection == projection and obs.args == wanted:
                return obs.value
        raise ProjectionFailure(
            f"event {self.tool!r} carries no observation for "
            f"{projection}({dict(args)!r})")


END_KIND = {"safe": END_SAFE, "error": END_ERROR}


@dataclass(frozen=True)
class Trace:
    catalog: ToolCatalog
    events: tuple[Event, ...] = ()
    end: Union[str, None] = None  # "safe" | "error" | None

    def __len__(self) -> int:
        return len(self.events)

    @property
    def ended(self) -> bool:
        return self.end is not None

    def end_marker(self) -> Union[str, None]:
        return END_KIND[self.end] if self.end is not None else None


def append_event(trace: Trace, tool: str, args: Mapping[str, Value],
                 state_obs: tuple[StateObservation, ...] = ()) -> Trace:
    """Return a new trace with one more event (output initially absent)."""
    if trace.ended:
        raise TraceEnded(f"trace already ended ({trace.end}); cannot append {tool!r}")
    sig = trace.catalog.get(tool)  # raises UnknownTool
    for name, val in args.items():
        param = sig.param(name)  # raises ArityMismatch
        if not value_fits(val, param.sort):
            raise SortMismatch(
                f"argument {tool}.{name} expects {param.sort}, "
                f"got {val!r} ({value_sort(val)})")
    event = Event(tool=tool, args=tuple(args.items()), state_obs=tuple(state_obs))
    return replace(trace, events=trace.events + (event,))


def record_output(trace: Trace, output: str) -> Trace:
    """Return a new trace whose final event carries the output string."""
    if not trace.events:
        raise EmptyTrace("no event to attach an output to")
    last = trace.events[-1]
    if last.output is not None:
        raise OutputAlreadySet(f"event {last.tool!r} already has an output")
    updated = replace(last, output=output)
    return replace(trace, events=trace.events[:-1] + (updated,))


def set_end(trace: Trace, kind: str) -> Trace:
    """Mark the trace ended ('safe' or 'error'); idempotent per kind."""
    if kind not in END_KIND:
        raise ValueError(f"end kind must be 'safe' or 'error', got {kind!r}")
    if trace.ended:
        if trace.end == kind:
            return trace
        raise TraceEnded(f"trace already ended ({trace.end})")
    return replace(trace, end=kind)


# --------------------------------------------------------------------------
# State-projection map
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionRequirement:
    """One projection a tool call must observe, with the recipe binding each
    projection parameter to one of the tool's own argument names."""

    projection: str
    recipe: tuple[tuple[str, str], ...]  # (projection param, tool param)

    def projection_args(self, call_args: Mapping[str, Value]) -> dict[str, Value]:
        return {pparam: call_args[tparam] for pparam, tparam in self.recipe}


#: tool name -> projections to evaluate just before generating a call to it
StateProjectionMap = dict[str, tuple[ProjectionRequirement, ...]]


def _trigger_and_constraints(node: Formula):
    """The event anchoring a predicate's evaluation plus every constraint
    whose state terms are observed at that event's time."""
    if isinstance(node, Before):
        return node.trigger, (node.trigger.constraint, node.earlier.constraint)
    if isinstance(node, After):
        return node.trigger, (node.trigger.constraint, node.later.constraint)
    if isinstance(node, (Exists, Forall)):
        return node.event, (node.event.constraint,)
    if isinstance(node, Seq):
        # validation rejects state terms inside sequence predicates
        return None, ()
    raise TypeError(f"not a predicate node: {node!r}")  # pragma: no cover


def _state_refs(constraint: Constraint):
    for op in constraint_operands(constraint):
        for ref in operand_refs(op):
            if isinstance(ref, StateRef):
                yield ref


def _recipe_for(ref: StateRef, trigger: EventConstraint,
                spec: ValidatedSpec) -> ProjectionRequirement:
    bound = {pat.name: pname for pname, pat in trigger.arg_patterns
             if isinstance(pat, Variable)}
    sig = spec.projections.get(ref.projection)
    recipe = []
    for var, param in zip(ref.args, sig.params):
        if var not in bound:
            raise UnboundProjectionArg(
                f"projection {ref.projection!r} argument {var!r} is not bound "
                f"by an argument pattern of {trigger.tool!r}")
        recipe.append((param.name, bound[var]))
    return ProjectionRequirement(ref.projection, tuple(recipe))


def build_projection_map(spec: ValidatedSpec) -> StateProjectionMap:
    """For each catalog tool, the projections that must be evaluated just
    before generating a call to it (empty list when the spec never observes
    state around that tool)."""
    result: dict[str, list[ProjectionRequirement]] = {
        name: [] for name in spec.catalog.names()}

    def walk(f: Formula) -> None:
        if isinstance(f, Not):
            walk(f.inner)
        elif isinstance(f, (Before, After, Seq, Exists, Forall)):
            trigger, constraints = _trigger_and_constraints(f)
            if trigger is None:
                return
            for c in constraints:
                for ref in _state_refs(c):
                    req = _recipe_for(ref, trigger, spec)
                    if req not in result[trigger.tool]:
                        result[trigger.tool].append(req)
        else:  # And / Or
            walk(f.lhs)
            walk(f.rhs)

    walk(spec.ast.root)
    return {tool: tuple(reqs) for tool, reqs in result.items()}


class CurriedProjections:
    """A projection map applied to a fixed tool state: ask it what a given
    call must observe and it runs the evaluators read-only."""

    def __init__(self, pmap: StateProjectionMap,
                 evaluators: Mapping[str, Callable[..., Value]], state) -> None:
        self.pmap = pmap
        self.evaluators = evaluators
        self.state = state

    def observe(self, tool: str, args: Mapping[str, Value]) -> tuple[StateObservation, ...]:
        observations = []
        for req in self.pmap.get(tool, ()):  # unknown tool -> nothing required
            proj_args = req.projection_args(args)
            try:
                evaluator = self.evaluators[req.projection]
                value = evaluator(self.state, **proj_args)
            except Exception as exc:
                raise ProjectionFailure(
                    f"projection {req.projection!r} failed on {proj_args!r}: {exc}"
                ) from exc
            observations.append(StateObservation(
                req.projection, tuple(proj_args.items()), value))
        return tuple(observations)


def evaluate_projections(q_s: CurriedProjections, tool: str,
                         args: Mapping[str, Value]) -> tuple[StateObservation, ...]:
    """Evaluate every projection the map requires for this call."""
    return q_s.observe(tool, args)


# --------------------------------------------------------------------------
# JSON-lines serialization
# --------------------------------------------------------------------------


def dump_trace(trace: Trace) -> str:
    """Serialize to the JSON-lines trace format (one event per line, keys in
    fixed order, optional final end-marker line)."""
    lines = []
    for ev in trace.events:
        record = {
            "tool": ev.tool,
            "args": dict(ev.args),
            "state": [
                {"proj": o.projection, "args": o.args_dict(), "value": o.value}
                for o in ev.state_obs
            ],
            "output": ev.output,
        }
        lines.append(json.dumps(record))
    if trace.end is not None:
        lines.append(json.dumps({"end": trace.end}))
    return "\n".join(lines) + ("\n" if lines else "")


def load_trace(text: str, catalog: ToolCatalog) -> Trace:
    """Parse the JSON-lines trace format back into a trace value."""
    trace = Trace(catalog)
    pending_outputs: list[tuple[int, str]] = []
    rows = [line for line in text.splitlines() if line.strip()]
    for lineno, line in enumerate(rows, start=1):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise TraceFormatError(f"line {lineno}: expected an object")
        if "end" in record:
            if lineno != len(rows):
                raise TraceFormatError(
                    f"line {lineno}: end marker must be the final line")
            if record["end"] not in END_KIND:
                raise TraceFormatError(
                    f"line {lineno}: end must be 'safe' or 'error'")
            trace = set_end(trace, record["end"])
            continue
        try:
            tool = record["tool"]
            args = record["args"]
            state = record.get("state", [])
            output = record.get("output")
        except KeyError as exc:
            raise TraceFormatError(f"line {lineno}: missing key {exc}") from exc
        observations = tuple(
            StateObservation(o["proj"], tuple(o["args"].items()), o["value"])
            for o in state)
        trace = append_event(trace, tool, args, observations)
        if output is not None:
            trace = record_output(trace, output)
    return trace
