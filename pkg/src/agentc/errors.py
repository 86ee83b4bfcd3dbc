"""Exception taxonomy shared across the package.

Every failure mode that crosses a module boundary gets a named class here so
callers can catch precisely.  Verdict-like outcomes (solver results, type-check
results) are *values*, not exceptions; only genuine faults are raised.
"""

from __future__ import annotations


class AgentcError(Exception):
    """Base class for all package-specific errors."""


# --------------------------------------------------------------------------
# Policy DSL: parsing and validation
# --------------------------------------------------------------------------


class DslSyntaxError(AgentcError):
    """Specification text deviates from the grammar.

    Carries the 1-based line/column of the offending token and the set of
    token descriptions that would have been accepted there.
    """

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        loc = f"{line}:{col}: {message}"
        if self.expected:
            loc += " (expected " + " or ".join(self.expected) + ")"
        super().__init__(loc)


class ValidationError(AgentcError):
    """Base class for specification validation failures."""


class UnknownTool(ValidationError):
    """An event names a tool absent from the catalog."""


class UnknownProjection(ValidationError):
    """A state term names a projection absent from the projection catalog."""


class ArityMismatch(ValidationError):
    """Wrong argument names/count against a tool or projection signature."""


class SortMismatch(ValidationError):
    """A value, variable, or comparison is used at an incompatible sort."""


class UnboundOutputRef(ValidationError):
    """output(b) where b is not a binder of any event in the formula."""


class IllegalOutputPosition(ValidationError):
    """output(b) used outside the second constraint of b's own precedence
    predicate (the only place past outputs are observable)."""


class IllegalStateOrOutputInNnf(ValidationError):
    """After normalization, a sequence node or negated precedence node
    carries a state() or output() term (forward-looking positions cannot
    observe them)."""


class DuplicateBinding(ValidationError):
    """The same binder name introduced by two events in one formula."""


class UnboundVariable(ValidationError):
    """A constraint references a variable not bound by any argument pattern
    in scope."""


# --------------------------------------------------------------------------
# Trace model
# --------------------------------------------------------------------------


class TraceEnded(AgentcError):
    """Mutation attempted on a trace that already carries an end marker."""


class EmptyTrace(AgentcError):
    """Operation requires at least one recorded event."""


class OutputAlreadySet(AgentcError):
    """record_output called twice for the same event."""


class UnboundProjectionArg(AgentcError):
    """A projection argument is not bound by the triggering event's
    argument patterns, so it cannot be evaluated at generation time."""


class ProjectionFailure(AgentcError):
    """A projection evaluator raised while computing a state observation."""


class TraceFormatError(AgentcError):
    """Trace file text does not follow the JSON-lines trace format."""


# --------------------------------------------------------------------------
# SMT backend
# --------------------------------------------------------------------------


class BackendUnavailable(AgentcError):
    """The configured solver backend cannot be reached or started."""


class UndeclaredSymbol(AgentcError):
    """An assertion references a symbol missing from the session's
    declarations."""


class SolverError(AgentcError):
    """The backend crashed or answered gibberish (distinct from Unknown)."""


# --------------------------------------------------------------------------
# Enforcement runtime
# --------------------------------------------------------------------------


class BacktrackUnderflow(AgentcError):
    """backtrack() asked to discard past the seeded prompt."""


class GeneratorFailure(AgentcError):
    """The generator violated its contract (e.g. returned no text)."""


class StepLimitExceeded(AgentcError):
    """The agent loop hit its step budget; the partial trace is attached."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class ToolExecutionFailure(AgentcError):
    """A tool raised during execution.  The runtime records the message as
    the event output and keeps going; this class exists so the failure can
    be represented and logged uniformly."""


# --------------------------------------------------------------------------
# Harness
# --------------------------------------------------------------------------


class DomainTooLarge(AgentcError):
    """Brute-force enumeration would exceed the configured cap."""


class ScenarioInvalid(AgentcError):
    """Scenario document failed validation; message lists diagnostics."""
