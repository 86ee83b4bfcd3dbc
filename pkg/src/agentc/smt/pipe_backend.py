"""External-solver backend speaking SMT-LIB 2 over a pipe.

The command line comes from the AGENTC_SMT_CMD environment variable (e.g.
``z3 -in`` or ``cvc5 --incremental``).  The protocol uses
``:print-success`` so every command gets an explicit acknowledgement;
`check-sat` answers are read under a wall-clock deadline derived from the
session budget, and a backend that overruns it is killed rather than trusted
further.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
from typing import Optional

from ..errors import BackendUnavailable, SolverError, UndeclaredSymbol
from ..fol import Declarations, FolFormula
from .session import SAT, UNKNOWN, UNSAT, SatResult, SolverSession
from .smtlib import assert_line, check_symbols, declaration_lines


class PipeSession(SolverSession):
    def __init__(self, declarations: Declarations, timeout_ms: int, cmd: str):
        super().__init__(declarations, timeout_ms)
        try:
            self.proc = subprocess.Popen(
                shlex.split(cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                bufsize=0,
            )
        except OSError as exc:
            raise BackendUnavailable(f"cannot start solver {cmd!r}: {exc}")
        self._buf = b""
        self._dead = False
        self._cmd("(set-option :print-success true)")
        # Best effort: not every solver knows this option.
        self._cmd(f"(set-option :timeout {timeout_ms})", tolerate_errors=True)
        self._cmd("(set-logic ALL)", tolerate_errors=True)
        for line in declaration_lines(declarations):
            self._cmd(line)

    # ---------------------------------------------------------------- pipe

    def _require_alive(self) -> None:
        if self._dead or self.proc.poll() is not None:
            raise SolverError("solver process is no longer running")

    def _readline(self, deadline_s: float) -> Optional[str]:
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buf:
            ready, _, _ = select.select([fd], [], [], deadline_s)
            if not ready:
                return None
            chunk = os.read(fd, 65536)
            if not chunk:
                raise SolverError("solver closed its output stream")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8", "replace").strip()

    def _send(self, text: str) -> None:
        self._require_alive()
        try:
            self.proc.stdin.write((text + "\n").encode("utf-8"))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._dead = True
            raise SolverError(f"solver pipe failed: {exc}")

    def _cmd(self, text: str, *, tolerate_errors: bool = False) -> None:
        self._send(text)
        reply = self._readline(deadline_s=30.0)
        if reply is None:
            self._kill()
            raise SolverError(f"solver did not acknowledge {text!r}")
        if reply == "success" or (tolerate_errors and reply == "unsupported"):
            return
        if tolerate_errors and reply.startswith("(error"):
            return
        if reply.startswith("(error"):
            raise SolverError(f"solver rejected {text!r}: {reply}")
        raise SolverError(f"unexpected solver reply to {text!r}: {reply}")

    def _kill(self) -> None:
        self._dead = True
        try:
            self.proc.kill()
        except OSError:  # pragma: no cover
            pass

    # ---------------------------------------------------------- primitives

    def _push(self) -> None:
        self._cmd("(push 1)")

    def _pop(self) -> None:
        self._cmd("(pop 1)")

    def _assert(self, formula: FolFormula) -> None:
        check_symbols(formula, self.declarations)
        self._cmd(assert_line(formula))

    def _check(self) -> SatResult:
        self._send("(check-sat)")
        # Grace on top of the solver-side budget for process latency.
        deadline = self.timeout_ms / 1000.0 + 10.0
        reply = self._readline(deadline)
        if reply is None:
            self._kill()
            return SatResult(UNKNOWN, "timeout: solver exceeded its budget")
        if reply == "sat":
            return SatResult(SAT)
        if reply == "unsat":
            return SatResult(UNSAT)
        if reply == "unknown":
            return SatResult(UNKNOWN, "solver reported unknown")
        if reply.startswith("(error"):
            raise SolverError(f"check-sat failed: {reply}")
        raise SolverError(f"unexpected check-sat reply: {reply}")

    def _close(self) -> None:
        if not self._dead and self.proc.poll() is None:
            try:
                self.proc.stdin.write(b"(exit)\n")
                self.proc.stdin.flush()
            except OSError:
                pass
        try:
            self.proc.terminate()
            self.proc.wait(timeout=2)
        except Exception:  # pragma: no cover
            self._kill()
