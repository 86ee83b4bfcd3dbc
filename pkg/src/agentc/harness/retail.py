"""A desk-scale retail customer-service environment.

Six tools over a tiny in-memory world of users and orders, plus the four
read-only state projections policies need: ownership, existence, order
status, and payment-method agreement.  Everything is deterministic and
mutation is confined to order status transitions, so scenario runs are
exactly reproducible.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..dsl import SORT_BOOL, SORT_STRING
from ..dsl.catalog import (
    ProjectionCatalog,
    ProjectionParam,
    ProjectionSig,
    ToolCatalog,
    ToolParam,
    ToolSig,
)

USER_NOT_FOUND = "Error: user not found"
ORDER_NOT_FOUND = "Error: order not found"


# --------------------------------------------------------------------------
# World state
# --------------------------------------------------------------------------


@dataclass
class User:
    user_id: str
    email: str
    first_name: str
    last_name: str
    zip: str
    payment_methods: list[str] = field(default_factory=list)


@dataclass
class Order:
    order_id: str
    user_id: str
    status: str  # pending | delivered | cancelled | return requested
    items: list[str] = field(default_factory=list)
    payment_method_id: str = ""


@dataclass
class RetailState:
    users: dict[str, User] = field(default_factory=dict)
    orders: dict[str, Order] = field(default_factory=dict)

    def snapshot(self) -> dict:
        return {
            "users": {u.user_id: vars(u).copy() for u in self.users.values()},
            "orders": {o.order_id: vars(o).copy() for o in self.orders.values()},
        }


#: a small world big enough for every bundled scenario: one user with two
#: delivered-order payment shapes, one with a pending order
DEFAULT_WORLD = {
    "users": [
        {"user_id": "mia_garcia_4516", "email": "mia.garcia2723@example.com",
         "first_name": "Mia", "last_name": "Garcia", "zip": "46229",
         "payment_methods": ["credit_card_3124", "paypal_9497703",
                             "gift_card_5501784"]},
        {"user_id": "noah_patel_6952", "email": "noah.patel1122@example.com",
         "first_name": "Noah", "last_name": "Patel", "zip": "80218",
         "payment_methods": ["paypal_3094927"]},
    ],
    "orders": [
        {"order_id": "#W5490111", "user_id": "mia_garcia_4516",
         "status": "delivered", "items": ["item_1", "item_2"],
         "payment_method_id": "credit_card_3124"},
        {"order_id": "#W1893025", "user_id": "noah_patel_6952",
         "status": "pending", "items": ["item_9"],
         "payment_method_id": "paypal_3094927"},
        {"order_id": "#W7430076", "user_id": "noah_patel_6952",
         "status": "delivered", "items": ["item_4"],
         "payment_method_id": "paypal_3094927"},
    ],
}


def build_state(world: Optional[Mapping] = None) -> RetailState:
    """Materialize a world description (the scenario's entity seed) into a
    fresh mutable state; the input is never aliased."""
    world = copy.deepcopy(dict(world if world is not None else DEFAULT_WORLD))
    state = RetailState()
    for u in world.get("users", ()):
        user = User(**u)
        state.users[user.user_id] = user
    for o in world.get("orders", ()):
        order = Order(**o)
        state.orders[order.order_id] = order
    return state


# --------------------------------------------------------------------------
# Catalogs
# --------------------------------------------------------------------------


RETAIL_TOOLS = (
    ToolSig("find_user_id_by_email",
            (ToolParam("email", SORT_STRING),),
            "Authenticate a user by email; returns the user id."),
    ToolSig("find_user_id_by_name_zip",
            (ToolParam("first_name", SORT_STRING),
             ToolParam("last_name", SORT_STRING),
             ToolParam("zip", SORT_STRING)),
            "Authenticate a user by name and zip code."),
    ToolSig("get_user_details",
            (ToolParam("user_id", SORT_STRING),),
            "Profile and payment methods of a user."),
    ToolSig("get_order_details",
            (ToolParam("order_id", SORT_STRING),),
            "Status, items, and payment method of an order."),
    ToolSig("cancel_pending_order",
            (ToolParam("order_id", SORT_STRING),),
            "Cancel an order that is still pending."),
    ToolSig("return_delivered_order_items",
            (ToolParam("order_id", SORT_STRING),
             ToolParam("item_ids", SORT_STRING),
             ToolParam("payment_method_id", SORT_STRING)),
            "Request a return of delivered items with a refund target."),
)

RETAIL_PROJECTIONS = (
    ProjectionSig("order_belongs_to",
                  (ProjectionParam("order_id", SORT_STRING),),
                  SORT_STRING,
                  "User id owning the order; empty when the order is unknown."),
    ProjectionSig("exists_order",
                  (ProjectionParam("order_id", SORT_STRING),),
                  SORT_BOOL,
                  "Whether the order id is on file."),
    ProjectionSig("get_order_status",
                  (ProjectionParam("order_id", SORT_STRING),),
                  SORT_STRING,
                  "Current status string; empty when the order is unknown."),
    ProjectionSig("payment_method_same",
                  (ProjectionParam("order_id", SORT_STRING),
                   ProjectionParam("payment_method_id", SORT_STRING)),
                  SORT_BOOL,
                  "Whether the given method matches the order's original one."),
)


def retail_catalog() -> ToolCatalog:
    return ToolCatalog(RETAIL_TOOLS)


def retail_projection_catalog() -> ProjectionCatalog:
    return ProjectionCatalog(RETAIL_PROJECTIONS)


# --------------------------------------------------------------------------
# Executable tools
# --------------------------------------------------------------------------


def _find_user_id_by_email(state: RetailState, email: str) -> str:
    for user in state.users.values():
        if user.email == email:
            return user.user_id
    return USER_NOT_FOUND


def _find_user_id_by_name_zip(state: RetailState, first_name: str,
                              last_name: str, zip: str) -> str:
    for user in state.users.values():
        if (user.first_name, user.last_name, user.zip) == \
                (first_name, last_name, zip):
            return user.user_id
    return USER_NOT_FOUND


def _get_user_details(state: RetailState, user_id: str) -> str:
    user = state.users.get(user_id)
    if user is None:
        return USER_NOT_FOUND
    return json.dumps(vars(user), sort_keys=True)


def _get_order_details(state: RetailState, order_id: str) -> str:
    order = state.orders.get(order_id)
    if order is None:
        return ORDER_NOT_FOUND
    return json.dumps(vars(order), sort_keys=True)


def _cancel_pending_order(state: RetailState, order_id: str) -> str:
    order = state.orders.get(order_id)
    if order is None:
        return ORDER_NOT_FOUND
    if order.status != "pending":
        return f"Error: order {order_id} is {order.status}, not pending"
    order.status = "cancelled"
    return f"Order {order_id} has been cancelled"


def _return_delivered_order_items(state: RetailState, order_id: str,
                                  item_ids: str,
                                  payment_method_id: str) -> str:
    order = state.orders.get(order_id)
    if order is None:
        return ORDER_NOT_FOUND
    if order.status != "delivered":
        return f"Error: order {order_id} is {order.status}, not delivered"
    order.status = "return requested"
    return (f"Return requested for {order_id}: items {item_ids}, "
            f"refund to {payment_method_id}")


def _emit_error(state, msg: str) -> str:
    return msg


def _action_confirmed(state, action_name: str, action_id: str) -> str:
    return f"Confirmed {action_name} for {action_id}"


RETAIL_EXECUTABLES = {
    "find_user_id_by_email": _find_user_id_by_email,
    "find_user_id_by_name_zip": _find_user_id_by_name_zip,
    "get_user_details": _get_user_details,
    "get_order_details": _get_order_details,
    "cancel_pending_order": _cancel_pending_order,
    "return_delivered_order_items": _return_delivered_order_items,
    "emit_error": _emit_error,
    "action_confirmed": _action_confirmed,
}


def _echo_ok(state, **args) -> str:
    return "ok"


def executables_for(catalog: ToolCatalog) -> dict:
    """Executables for every catalog tool: the retail implementations where
    they exist, a constant acknowledgement otherwise (abstract scenarios
    only need the trace, not meaningful outputs)."""
    table = {}
    for sig in catalog:
        table[sig.name] = RETAIL_EXECUTABLES.get(sig.name, _echo_ok)
    return table


# --------------------------------------------------------------------------
# State projections
# --------------------------------------------------------------------------


def _order_belongs_to(state: RetailState, order_id: str) -> str:
    order = state.orders.get(order_id)
    return order.user_id if order is not None else ""


def _exists_order(state: RetailState, order_id: str) -> bool:
    return order_id in state.orders


def _get_order_status(state: RetailState, order_id: str) -> str:
    order = state.orders.get(order_id)
    return order.status if order is not None else ""


def _payment_method_same(state: RetailState, order_id: str,
                         payment_method_id: str) -> bool:
    order = state.orders.get(order_id)
    return order is not None and order.payment_method_id == payment_method_id


RETAIL_PROJECTION_EVALUATORS = {
    "order_belongs_to": _order_belongs_to,
    "exists_order": _exists_order,
    "get_order_status": _get_order_status,
    "payment_method_same": _payment_method_same,
}
