"""Generation-time enforcement: generators, token accounting, candidate
gating, and the session interpreter."""

from .enforce import (
    EMIT_ERROR,
    ERROR_MARKER,
    GRAMMATICAL,
    SOLVER_LEVEL,
    TYPE_LEVEL,
    AgentConfig,
    CandidateRejection,
    EndErrorOutcome,
    EndSafeOutcome,
    GenOutcome,
    RunResult,
    SafeLlmConfig,
    ToolOutcome,
    gen_call,
    gen_call_reprompt,
    run_agent,
    safe_llm,
)
from .generator import (
    ConstrainedGenerator,
    GenTokenCounts,
    RepromptGenerator,
    ScriptedConstrainedGenerator,
    ScriptedRepromptGenerator,
    TurnScript,
)
from .tokens import TokenLedger, count_tokens

__all__ = [
    "EMIT_ERROR",
    "ERROR_MARKER",
    "GRAMMATICAL",
    "SOLVER_LEVEL",
    "TYPE_LEVEL",
    "AgentConfig",
    "CandidateRejection",
    "ConstrainedGenerator",
    "EndErrorOutcome",
    "EndSafeOutcome",
    "GenOutcome",
    "GenTokenCounts",
    "RepromptGenerator",
    "RunResult",
    "SafeLlmConfig",
    "ScriptedConstrainedGenerator",
    "ScriptedRepromptGenerator",
    "ToolOutcome",
    "TokenLedger",
    "TurnScript",
    "count_tokens",
    "gen_call",
    "gen_call_reprompt",
    "run_agent",
    "safe_llm",
]
