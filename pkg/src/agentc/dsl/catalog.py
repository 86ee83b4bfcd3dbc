"""Tool and projection catalogs: the signatures specifications validate
against and the solver encoding declares symbols from.

Two call records are always available regardless of the registered tools:
``emit_error(msg)`` (the runtime's "could not produce a compliant call"
record) and ``action_confirmed(action_name, action_id)`` (an explicit user
approval record).  Both are no-ops on tool state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .ast import SORT_BOOL, SORT_STRING, SORTS
from ..errors import ArityMismatch, UnknownProjection, UnknownTool

END_SAFE = "End_safe"
END_ERROR = "End_error"
END_MARKERS = (END_SAFE, END_ERROR)


@dataclass(frozen=True)
class ToolParam:
    name: str
    sort: str
    required: bool = True

    def __post_init__(self):
        if self.sort not in SORTS:
            raise ValueError(f"unknown sort {self.sort!r} for parameter {self.name!r}")


@dataclass(frozen=True)
class ToolSig:
    name: str
    params: tuple[ToolParam, ...] = ()
    description: str = ""

    def param(self, name: str) -> ToolParam:
        for p in self.params:
            if p.name == name:
                return p
        raise ArityMismatch(f"tool {self.name!r} has no parameter {name!r}")

    def has_param(self, name: str) -> bool:
        return any(p.name == name for p in self.params)

    def required_params(self) -> tuple[ToolParam, ...]:
        return tuple(p for p in self.params if p.required)


BUILTIN_TOOLS = (
    ToolSig("emit_error", (ToolParam("msg", SORT_STRING),),
            "Records why no compliant call could be produced."),
    ToolSig("action_confirmed",
            (ToolParam("action_name", SORT_STRING), ToolParam("action_id", SORT_STRING)),
            "Records explicit user approval of a pending action."),
)


class ToolCatalog:
    """Immutable name -> signature lookup, built-ins always included."""

    def __init__(self, tools: Iterable[ToolSig] = ()):
        self._tools: dict[str, ToolSig] = {}
        for sig in BUILTIN_TOOLS:
            self._tools[sig.name] = sig
        for sig in tools:
            self._tools[sig.name] = sig

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def __iter__(self) -> Iterator[ToolSig]:
        return iter(self._tools.values())

    def names(self) -> tuple[str, ...]:
        return tuple(self._tools)

    def get(self, name: str) -> ToolSig:
        try:
            return self._tools[name]
        except KeyError:
            raise UnknownTool(f"tool {name!r} is not in the catalog") from None


@dataclass(frozen=True)
class ProjectionParam:
    name: str
    sort: str


@dataclass(frozen=True)
class ProjectionSig:
    name: str
    params: tuple[ProjectionParam, ...]
    return_sort: str
    description: str = ""

    def __post_init__(self):
        if self.return_sort not in SORTS:
            raise ValueError(f"unknown return sort {self.return_sort!r}")


class ProjectionCatalog:
    """Immutable name -> projection signature lookup."""

    def __init__(self, projections: Iterable[ProjectionSig] = ()):
        self._projections = {sig.name: sig for sig in projections}

    def __contains__(self, name: str) -> bool:
        return name in self._projections

    def __iter__(self) -> Iterator[ProjectionSig]:
        return iter(self._projections.values())

    def names(self) -> tuple[str, ...]:
        return tuple(self._projections)

    def get(self, name: str) -> ProjectionSig:
        try:
            return self._projections[name]
        except KeyError:
            raise UnknownProjection(f"projection {name!r} is not registered") from None
