"""Bundled retail policies.

Two policies ship with the environment: order details require prior
successful authentication by the order's owner, and refunds must go to the
original payment method or a gift card.  They exercise every feature class
the DSL offers — ordering, outputs, state projections, wildcard and
variable patterns, and string functions.
"""

from __future__ import annotations

from ..dsl import parse_spec, validate_spec
from ..dsl.validate import ValidatedSpec
from .retail import retail_catalog, retail_projection_catalog

#: get_order_details only after find_user_id_by_email succeeded for the
#: order's owner, on an order that exists
AUTH_POLICY_TEXT = """\
before(
    get_order_details(order_id = order_id), true,
    f:find_user_id_by_email(email = .*),
    output(f) != "Error: user not found"
      && state(order_belongs_to(order_id)) == output(f)
      && state(exists_order(order_id)) == true
)
"""

#: refunds go to the order's original payment method or to a gift card
REFUND_POLICY_TEXT = """\
forall(
    return_delivered_order_items(
        order_id = order_id, item_ids = .*, payment_method_id = payment),
    state(payment_method_same(order_id, payment)) == true
      || contains(payment, "gift_card")
)
"""

#: cancellation only for orders still pending
CANCEL_POLICY_TEXT = """\
forall(
    cancel_pending_order(order_id = order_id),
    state(get_order_status(order_id)) == "pending"
)
"""


def _build(text: str) -> ValidatedSpec:
    return validate_spec(parse_spec(text), retail_catalog(),
                         retail_projection_catalog())


def auth_policy() -> ValidatedSpec:
    return _build(AUTH_POLICY_TEXT)


def refund_policy() -> ValidatedSpec:
    return _build(REFUND_POLICY_TEXT)


def cancel_policy() -> ValidatedSpec:
    return _build(CANCEL_POLICY_TEXT)
