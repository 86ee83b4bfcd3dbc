"""Shallow argument checking against a tool signature.

No inference: an int literal fits an int or (widened) a real parameter; a
string literal fits a string parameter; true/false fit bool.  Array- or
object-shaped values fit only string parameters, as their canonical text.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from ..dsl.ast import SORT_BOOL, SORT_INT, SORT_REAL, SORT_STRING
from ..dsl.catalog import ToolCatalog
from ..errors import UnknownTool
from ..trace import Value
from .toolcall import CompositeValue, RawValue


@dataclass(frozen=True)
class ArgVerdict:
    name: str
    ok: bool
    reason: Optional[str] = None
    value: Optional[Value] = None  # the admitted value (composites as text)


@dataclass(frozen=True)
class TypeCheckResult:
    verdicts: tuple[ArgVerdict, ...]
    signature_complete: bool
    unknown_tool: bool = False

    def admitted_args(self) -> dict[str, Value]:
        return {v.name: v.value for v in self.verdicts if v.ok}

    def failures(self) -> tuple[ArgVerdict, ...]:
        return tuple(v for v in self.verdicts if not v.ok)


def _check_value(value: RawValue, sort: str) -> tuple[bool, Optional[str],
                                                      Optional[Value]]:
    if value is None:
        return False, "null is not a value of any parameter sort", None
    if isinstance(value, CompositeValue):
        if sort == SORT_STRING:
            return True, None, value.text
        return False, f"structured value does not fit sort {sort}", None
    if isinstance(value, bool):
        if sort == SORT_BOOL:
            return True, None, value
        return False, f"bool literal does not fit sort {sort}", None
    if isinstance(value, int):
        if sort in (SORT_INT, SORT_REAL):
            return True, None, value
        return False, f"int literal does not fit sort {sort}", None
    if isinstance(value, float):
        if sort == SORT_REAL:
            return True, None, value
        return False, f"real literal does not fit sort {sort}", None
    if isinstance(value, str):
        if sort == SORT_STRING:
            return True, None, value
        return False, f"string literal does not fit sort {sort}", None
    return False, f"unsupported value {value!r}", None  # pragma: no cover


def type_check_and_completeness(fn_name: str, fn_args: Mapping[str, RawValue],
                                catalog: ToolCatalog) -> TypeCheckResult:
    try:
        sig = catalog.get(fn_name)
    except UnknownTool:
        return TypeCheckResult(
            verdicts=(ArgVerdict(name="", ok=False,
                                 reason=f"unknown tool {fn_name!r}"),),
            signature_complete=False,
            unknown_tool=True,
        )
    verdicts: list[ArgVerdict] = []
    for name, value in fn_args.items():
        if not sig.has_param(name):
            verdicts.append(ArgVerdict(
                name=name, ok=False,
                reason=f"tool {fn_name!r} has no parameter {name!r}"))
            continue
        ok, reason, admitted = _check_value(value, sig.param(name).sort)
        verdicts.append(ArgVerdict(name=name, ok=ok, reason=reason,
                                   value=admitted))
    ok_names = {v.name for v in verdicts if v.ok}
    complete = all(p.name in ok_names for p in sig.required_params()) \
        and all(v.ok for v in verdicts)
    return TypeCheckResult(verdicts=tuple(verdicts),
                           signature_complete=complete)
