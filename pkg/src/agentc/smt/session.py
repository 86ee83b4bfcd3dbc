"""Solver session contract.

A session owns one incremental solver instance configured with a fixed set of
declarations and a per-check time budget.  Assertions are grouped into frames
(push/pop); a frame handle identifies how far to unwind.  `check_sat` returns
a three-valued result — Unknown is an honest answer (budget exhausted,
incomplete theory combination), distinct from `SolverError`, which means the
backend itself failed.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import BackendUnavailable
from ..fol import Declarations, FolFormula

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class SatResult:
    status: str  # one of SAT / UNSAT / UNKNOWN
    reason: Optional[str] = None  # populated for UNKNOWN

    @property
    def is_sat(self) -> bool:
        return self.status == SAT

    @property
    def is_unsat(self) -> bool:
        return self.status == UNSAT

    @property
    def is_unknown(self) -> bool:
        return self.status == UNKNOWN


@dataclass
class SessionStats:
    checks: int = 0
    sat: int = 0
    unsat: int = 0
    unknown: int = 0
    solve_time_s: float = 0.0

    def record(self, result: SatResult, elapsed: float) -> None:
        self.checks += 1
        self.solve_time_s += elapsed
        if result.status == SAT:
            self.sat += 1
        elif result.status == UNSAT:
            self.unsat += 1
        else:
            self.unknown += 1


class SolverSession:
    """Base class; backends implement the _-prefixed primitives."""

    def __init__(self, declarations: Declarations, timeout_ms: int):
        if timeout_ms <= 0:
            raise ValueError("timeout_ms must be a positive number of milliseconds")
        self.declarations = declarations
        self.timeout_ms = timeout_ms
        self.stats = SessionStats()
        self._frames: list[int] = []
        self._next_frame = 0
        self._closed = False

    # -- public API ---------------------------------------------------------

    def declare(self, declarations: Declarations) -> None:
        """Re-declaring the identical signature set is a no-op; anything
        else conflicts with the running solver and is rejected."""
        if declarations != self.declarations:
            from ..errors import SolverError
            raise SolverError(
                "conflicting redeclaration: session already configured with a "
                "different signature set")

    def push_assert(self, formulas: Sequence[FolFormula]) -> int:
        """Open a frame, assert the formulas in it, return the frame handle."""
        self._check_open()
        self._push()
        handle = self._next_frame
        self._next_frame += 1
        self._frames.append(handle)
        try:
            for f in formulas:
                self._assert(f)
        except Exception:
            self._frames.pop()
            self._pop()
            raise
        return handle

    def pop(self, handle: Optional[int] = None) -> None:
        """Discard the most recent frame, or every frame down to and
        including `handle`."""
        self._check_open()
        if not self._frames:
            from ..errors import SolverError
            raise SolverError("no frame to pop")
        if handle is None:
            handle = self._frames[-1]
        if handle not in self._frames:
            from ..errors import SolverError
            raise SolverError(f"unknown frame handle {handle}")
        while self._frames and self._frames[-1] >= handle:
            self._frames.pop()
            self._pop()

    def check_sat(self) -> SatResult:
        self._check_open()
        start = time.monotonic()
        result = self._check()
        self.stats.record(result, time.monotonic() - start)
        return result

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._close()

    def __enter__(self) -> "SolverSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- backend primitives --------------------------------------------------

    def _push(self) -> None:
        raise NotImplementedError

    def _pop(self) -> None:
        raise NotImplementedError

    def _assert(self, formula: FolFormula) -> None:
        raise NotImplementedError

    def _check(self) -> SatResult:
        raise NotImplementedError

    def _close(self) -> None:
        pass

    def _check_open(self) -> None:
        if self._closed:
            from ..errors import SolverError
            raise SolverError("session is closed")


SMT_CMD_ENV = "AGENTC_SMT_CMD"


def open_session(declarations: Declarations, timeout_ms: int,
                 backend: str = "auto") -> SolverSession:
    """Create a solver session.

    backend: "z3" (in-process), "pipe" (external SMT-LIB 2 process named by
    the AGENTC_SMT_CMD environment variable), or "auto" (pipe if the variable
    is set, otherwise z3).
    """
    if timeout_ms <= 0:
        raise ValueError("timeout_ms must be a positive number of milliseconds")
    cmd = os.environ.get(SMT_CMD_ENV)
    if backend == "auto":
        backend = "pipe" if cmd else "z3"
    if backend == "pipe":
        if not cmd:
            raise BackendUnavailable(
                f"pipe backend requested but {SMT_CMD_ENV} is not set")
        from .pipe_backend import PipeSession
        return PipeSession(declarations, timeout_ms, cmd)
    if backend == "z3":
        from .z3_backend import Z3Session
        return Z3Session(declarations, timeout_ms)
    raise ValueError(f"unknown backend {backend!r}")
