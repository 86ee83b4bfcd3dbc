"""Generator contracts and deterministic scripted implementations.

Two flavors exist.  A *constrained* generator is driven production by
production: `prompt` seeds a turn, `forward(nt)` emits text up to and
including one occurrence of the non-terminal, `backtrack(nt)` discards text
back through the most recent occurrence.  A *reprompt* generator only knows
`complete(prompt)`, returning a whole completion.

The scripted implementations replay per-turn candidate lists and are the
test double for every scenario: a pointer advances on each forward/complete
(not on backtrack), so retries see the next candidate, and an exhausted list
repeats its final entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from ..errors import BacktrackUnderflow, GeneratorFailure
from .tokens import count_tokens
from ..grammar.toolcall import FN_START, render_value


@dataclass
class GenTokenCounts:
    input: int = 0
    output: int = 0


class ConstrainedGenerator:
    """Contract for the constrained flavor."""

    tokens: GenTokenCounts

    def prompt(self, text: str) -> None:
        raise NotImplementedError

    def forward(self, nt: str) -> str:
        """Generate text up to and including one occurrence of nt; returns
        the newly emitted chunk."""
        raise NotImplementedError

    def backtrack(self, nt: str) -> str:
        """Discard generated text back through the most recent occurrence of
        nt; returns the discarded chunk(s)."""
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError

    def text(self) -> str:
        """Full generated suffix for the current turn."""
        raise NotImplementedError


class RepromptGenerator:
    """Contract for the reprompt flavor."""

    tokens: GenTokenCounts

    def complete(self, prompt: str) -> str:
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError


# --------------------------------------------------------------------------
# Scripted constrained generator
# --------------------------------------------------------------------------

#: one name candidate: a tool name, or prose (no tool call at all)
NameCandidate = Union[str, dict]


@dataclass
class TurnScript:
    """Candidates for one agent turn."""

    names: Sequence[NameCandidate] = ()
    args: Sequence[tuple[str, object]] = ()


@dataclass
class _Chunk:
    nt: str  # "name" or "arg" or "prose"
    text: str


class ScriptedConstrainedGenerator(ConstrainedGenerator):
    def __init__(self, turns: Sequence[TurnScript]):
        self.turns = list(turns)
        self.tokens = GenTokenCounts()
        self._turn = -1
        self._name_ptr = 0
        self._arg_ptr = 0
        self._chunks: list[_Chunk] = []
        self._seeded = False

    # ------------------------------------------------------------- helpers

    @property
    def seeded(self) -> bool:
        return self._seeded

    def _script(self) -> TurnScript:
        if self._turn < 0:
            raise GeneratorFailure("generator was never prompted")
        if self._turn >= len(self.turns):
            raise GeneratorFailure(
                f"script has {len(self.turns)} turns; turn {self._turn + 1} "
                "was requested")
        return self.turns[self._turn]

    @staticmethod
    def _pick(candidates: Sequence, ptr: int):
        if not candidates:
            raise GeneratorFailure("script has no candidates for this turn")
        return candidates[min(ptr, len(candidates) - 1)]

    def _args_open(self) -> bool:
        for chunk in reversed(self._chunks):
            if chunk.nt == "arg":
                return True
            if chunk.nt == "name":
                return False
        return False

    def _emit(self, nt: str, text: str) -> str:
        self._chunks.append(_Chunk(nt, text))
        self.tokens.output += count_tokens(text)
        return text

    # ------------------------------------------------------------ contract

    def prompt(self, text: str) -> None:
        self._turn += 1
        self._name_ptr = 0
        self._arg_ptr = 0
        self._chunks = []
        self._seeded = True
        self.tokens.input += count_tokens(text)
        self._script()  # fail fast when the script is exhausted

    def forward(self, nt: str) -> str:
        script = self._script()
        if nt == "name":
            cand = self._pick(script.names, self._name_ptr)
            self._name_ptr += 1
            if isinstance(cand, dict):
                return self._emit("prose", cand["text"])
            return self._emit("name", f'{FN_START}{{"name": "{cand}"')
        if nt == "arg":
            name, value = self._pick(script.args, self._arg_ptr)
            self._arg_ptr += 1
            sep = ", " if self._args_open() else ', "arguments": {'
            return self._emit("arg", f'{sep}"{name}": {render_value(value)}')
        raise GeneratorFailure(f"cannot generate non-terminal {nt!r}")

    def backtrack(self, nt: str) -> str:
        target = "name" if nt == "name" else nt
        kinds = {"name": {"name", "prose"}, "arg": {"arg"}}.get(target)
        if kinds is None:
            raise GeneratorFailure(f"cannot backtrack non-terminal {nt!r}")
        idx = None
        for i in range(len(self._chunks) - 1, -1, -1):
            if self._chunks[i].nt in kinds:
                idx = i
                break
        if idx is None:
            raise BacktrackUnderflow(
                f"no occurrence of {nt!r} to backtrack over")
        discarded = "".join(c.text for c in self._chunks[idx:])
        del self._chunks[idx:]
        return discarded

    def reset(self) -> None:
        self._chunks = []

    def text(self) -> str:
        return "".join(c.text for c in self._chunks)


# --------------------------------------------------------------------------
# Scripted reprompt generator
# --------------------------------------------------------------------------


class ScriptedRepromptGenerator(RepromptGenerator):
    def __init__(self, turns: Sequence[Sequence[str]]):
        self.turns = [list(t) for t in turns]
        self.tokens = GenTokenCounts()
        self._turn = -1
        self._ptr = 0

    def begin_turn(self) -> None:
        self._turn += 1
        self._ptr = 0
        if self._turn >= len(self.turns):
            raise GeneratorFailure(
                f"script has {len(self.turns)} turns; turn {self._turn + 1} "
                "was requested")

    def complete(self, prompt: str) -> str:
        if self._turn < 0:
            self.begin_turn()
        candidates = self.turns[self._turn]
        if not candidates:
            raise GeneratorFailure("script has no completions for this turn")
        text = candidates[min(self._ptr, len(candidates) - 1)]
        self._ptr += 1
        self.tokens.input += count_tokens(prompt)
        self.tokens.output += count_tokens(text)
        return text

    def reset(self) -> None:
        pass  # completions carry no retained context
