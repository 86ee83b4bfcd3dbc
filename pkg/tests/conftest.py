"""Shared fixtures: small tool worlds, bundled retail policies, and trace
builders used across the test suite."""

from __future__ import annotations

import pytest

from agentc.compliance import clear_session_cache
from agentc.dsl import (
    ProjectionCatalog,
    ProjectionParam,
    ProjectionSig,
    SORT_BOOL,
    SORT_INT,
    SORT_STRING,
    ToolCatalog,
    ToolParam,
    ToolSig,
    parse_spec,
    validate_spec,
)
from agentc.harness import (
    auth_policy,
    cancel_policy,
    refund_policy,
    retail_catalog,
    retail_projection_catalog,
)
from agentc.trace import StateObservation, Trace, append_event, record_output, set_end


# --------------------------------------------------------------------------
# Worlds
# --------------------------------------------------------------------------


@pytest.fixture(scope="session")
def file_catalog() -> ToolCatalog:
    """Three single-argument file tools, the smallest world that exercises
    ordering policies."""
    return ToolCatalog([
        ToolSig("open", (ToolParam("file", SORT_STRING),)),
        ToolSig("read", (ToolParam("file", SORT_STRING),)),
        ToolSig("close", (ToolParam("file", SORT_STRING),)),
    ])


@pytest.fixture(scope="session")
def rich_catalog() -> ToolCatalog:
    """A world with every sort, for validation and type-checking tests."""
    return ToolCatalog([
        ToolSig("write", (
            ToolParam("path", SORT_STRING),
            ToolParam("bytes", SORT_INT),
            ToolParam("sync", SORT_BOOL),
        )),
        ToolSig("ping", ()),
    ])


@pytest.fixture(scope="session")
def file_projections() -> ProjectionCatalog:
    return ProjectionCatalog([
        ProjectionSig("mode", (ProjectionParam("file", SORT_STRING),),
                      SORT_STRING),
        ProjectionSig("locked", (ProjectionParam("file", SORT_STRING),),
                      SORT_BOOL),
    ])


@pytest.fixture(scope="session")
def no_projections() -> ProjectionCatalog:
    return ProjectionCatalog()


@pytest.fixture(scope="session")
def build(file_catalog, file_projections):
    """Parse and validate a policy over the file world."""
    def _build(text: str):
        return validate_spec(parse_spec(text), file_catalog, file_projections)
    return _build


# --------------------------------------------------------------------------
# Retail policies
# --------------------------------------------------------------------------


@pytest.fixture(scope="session")
def retail_tools() -> ToolCatalog:
    return retail_catalog()


@pytest.fixture(scope="session")
def retail_projs() -> ProjectionCatalog:
    return retail_projection_catalog()


@pytest.fixture(scope="session")
def auth_spec():
    return auth_policy()


@pytest.fixture(scope="session")
def refund_spec():
    return refund_policy()


@pytest.fixture(scope="session")
def cancel_spec():
    return cancel_policy()


# --------------------------------------------------------------------------
# Trace builders
# --------------------------------------------------------------------------


def trace_of(catalog: ToolCatalog, *steps) -> Trace:
    """Build a trace from compact step tuples:

    ("tool", {args})                      append an event
    ("tool", {args}, [(proj, {pargs}, v)]) ... with state observations
    ("tool", {args}, obs, "output")        ... and an output string
    ("END", "safe" | "error")              end the trace
    """
    trace = Trace(catalog)
    for step in steps:
        if step[0] == "END":
            trace = set_end(trace, step[1])
            continue
        tool, args = step[0], step[1]
        obs = tuple(
            StateObservation(proj, tuple(pargs.items()), value)
            for proj, pargs, value in (step[2] if len(step) > 2 else ())
        )
        trace = append_event(trace, tool, args, obs)
        if len(step) > 3 and step[3] is not None:
            trace = record_output(trace, step[3])
    return trace


@pytest.fixture(scope="session")
def mk_trace():
    return trace_of


# An authenticated order lookup: the owner's email lookup succeeded and its
# output matches the order's owner, and the order exists.
AUTH_OK_STEPS = (
    ("find_user_id_by_email", {"email": "mia.garcia2723@example.com"},
     (), "mia_garcia_4516"),
    ("get_order_details", {"order_id": "#W5490111"},
     (("order_belongs_to", {"order_id": "#W5490111"}, "mia_garcia_4516"),
      ("exists_order", {"order_id": "#W5490111"}, True))),
)

# The same lookup with no prior authentication at all.
AUTH_BARE_STEPS = (
    ("get_order_details", {"order_id": "#W5490111"},
     (("order_belongs_to", {"order_id": "#W5490111"}, "mia_garcia_4516"),
      ("exists_order", {"order_id": "#W5490111"}, True))),
)

# Authenticated as the wrong user: lookup output does not own the order.
AUTH_WRONG_USER_STEPS = (
    ("find_user_id_by_email", {"email": "noah.patel1122@example.com"},
     (), "noah_patel_6952"),
    ("get_order_details", {"order_id": "#W5490111"},
     (("order_belongs_to", {"order_id": "#W5490111"}, "mia_garcia_4516"),
      ("exists_order", {"order_id": "#W5490111"}, True))),
)

# A refund to the order's original payment method.
REFUND_OK_STEPS = (
    ("return_delivered_order_items",
     {"order_id": "#W5490111", "item_ids": "item_1",
      "payment_method_id": "credit_card_3124"},
     (("payment_method_same",
       {"order_id": "#W5490111", "payment_method_id": "credit_card_3124"}, True),)),
)

# A refund diverted to a different, non-gift-card method.
REFUND_DIVERTED_STEPS = (
    ("return_delivered_order_items",
     {"order_id": "#W5490111", "item_ids": "item_1",
      "payment_method_id": "paypal_9497703"},
     (("payment_method_same",
       {"order_id": "#W5490111", "payment_method_id": "paypal_9497703"}, False),)),
)

# A refund to a gift card (allowed even though it differs from the original).
REFUND_GIFT_CARD_STEPS = (
    ("return_delivered_order_items",
     {"order_id": "#W5490111", "item_ids": "item_1",
      "payment_method_id": "gift_card_5501784"},
     (("payment_method_same",
       {"order_id": "#W5490111", "payment_method_id": "gift_card_5501784"}, False),)),
)


@pytest.fixture(autouse=True, scope="module")
def _fresh_solver_sessions():
    """Keep pooled solver sessions from leaking memory across test modules."""
    yield
    clear_session_cache()
