"""Evaluation harness: reference oracle, scripted model, retail environment,
spec templates, and scenario runner."""

from .fuzz import (
    FuzzCase,
    OracleMemo,
    UNKNOWN_TOOL_NAME,
    build_fuzz_case,
    build_fuzz_corpus,
    replay_verdicts,
    soundness_violations,
)
from .oracle import (
    OutputUnavailable,
    extension_letters,
    interpret_compliance_oracle,
    satisfies_word,
)
from .policies import (
    AUTH_POLICY_TEXT,
    CANCEL_POLICY_TEXT,
    REFUND_POLICY_TEXT,
    auth_policy,
    cancel_policy,
    refund_policy,
)
from .retail import (
    DEFAULT_WORLD,
    ORDER_NOT_FOUND,
    RETAIL_EXECUTABLES,
    RETAIL_PROJECTION_EVALUATORS,
    RETAIL_PROJECTIONS,
    RETAIL_TOOLS,
    USER_NOT_FOUND,
    RetailState,
    build_state,
    executables_for,
    retail_catalog,
    retail_projection_catalog,
)
from .scenario import (
    Metrics,
    Scenario,
    ScenarioInvalid,
    ScenarioResult,
    aggregate_metrics,
    compute_metrics,
    load_scenario,
    marker_matches,
    prefix_verdicts,
    run_scenario,
    session_metrics,
    trace_harmed,
    validate_scenario,
)
from .suite import (
    ADVERSARIAL_NAMES,
    BENIGN_NAMES,
    SCENARIO_DOCS,
    bundled_scenario,
    bundled_scenarios,
)
from .templates import (
    GENERATED_DOMAIN,
    GENERATED_TOOLS,
    ORACLE_EXTENSION_BOUND,
    TemplateSpec,
    catalog_letters,
    enumerate_traces,
    generated_catalog,
    pipeline_template,
    showcase_templates,
    template_family,
)

__all__ = [
    "ADVERSARIAL_NAMES",
    "AUTH_POLICY_TEXT",
    "BENIGN_NAMES",
    "CANCEL_POLICY_TEXT",
    "DEFAULT_WORLD",
    "FuzzCase",
    "GENERATED_DOMAIN",
    "GENERATED_TOOLS",
    "Metrics",
    "ORACLE_EXTENSION_BOUND",
    "ORDER_NOT_FOUND",
    "OracleMemo",
    "OutputUnavailable",
    "REFUND_POLICY_TEXT",
    "RETAIL_EXECUTABLES",
    "RETAIL_PROJECTION_EVALUATORS",
    "RETAIL_PROJECTIONS",
    "RETAIL_TOOLS",
    "RetailState",
    "SCENARIO_DOCS",
    "Scenario",
    "ScenarioInvalid",
    "ScenarioResult",
    "TemplateSpec",
    "UNKNOWN_TOOL_NAME",
    "USER_NOT_FOUND",
    "aggregate_metrics",
    "auth_policy",
    "build_fuzz_case",
    "build_fuzz_corpus",
    "build_state",
    "bundled_scenario",
    "bundled_scenarios",
    "cancel_policy",
    "catalog_letters",
    "compute_metrics",
    "enumerate_traces",
    "executables_for",
    "extension_letters",
    "generated_catalog",
    "interpret_compliance_oracle",
    "load_scenario",
    "marker_matches",
    "pipeline_template",
    "prefix_verdicts",
    "refund_policy",
    "replay_verdicts",
    "retail_catalog",
    "retail_projection_catalog",
    "run_scenario",
    "satisfies_word",
    "session_metrics",
    "showcase_templates",
    "soundness_violations",
    "template_family",
    "trace_harmed",
    "validate_scenario",
]
