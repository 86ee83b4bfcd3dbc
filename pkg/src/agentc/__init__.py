"""Runtime policy enforcement for tool-calling language-model agents.

Safety requirements over tool-call histories are written in a small temporal
DSL, compiled to first-order formulas over event timelines, and discharged by
an SMT solver while the agent generates, so that every emitted tool call is
checked against the policy before it executes.
"""

__version__ = "0.1.0"
