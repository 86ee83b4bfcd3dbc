"""Token accounting.

A deterministic stand-in tokenizer (whitespace split) keeps the four
bookkeeping categories comparable across runs: `input` — prompt text fed
once per turn; `reprompt` — prompt text re-fed on retries after the first;
`output` — everything a generator emitted; `reject` — the subset of output
later discarded with a rejected candidate.
"""

from __future__ import annotations

from dataclasses import dataclass


def count_tokens(text: str) -> int:
    return len(text.split())


@dataclass
class TokenLedger:
    input: int = 0
    reprompt: int = 0
    output: int = 0
    reject: int = 0

    def add(self, other: "TokenLedger") -> None:
        self.input += other.input
        self.reprompt += other.reprompt
        self.output += other.output
        self.reject += other.reject

    def as_dict(self) -> dict[str, int]:
        return {"input": self.input, "reprompt": self.reprompt,
                "output": self.output, "reject": self.reject}
