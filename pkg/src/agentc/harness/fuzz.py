"""Randomized sessions for enforcement soundness fuzzing.

Each case is a deterministic scenario over one template policy: a scripted
generator proposes a seeded mix of policy-violating and policy-abiding
candidates (including occasional unknown tools and whole turns with no
acceptable candidate), the session runs under enforcement, and
`replay_verdicts` re-judges every prefix of the resulting trace with the
brute-force oracle.  Tests assert `soundness_violations` stays empty: no
accepted call may ever turn a compliant trace noncompliant.

Construction classifies candidates with the same oracle, so the labels are
independent of the solver-backed checker being tested.  A shared
`OracleMemo` makes the repeated prefix judgments cheap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from ..dsl.catalog import BUILTIN_TOOLS, ToolCatalog
from ..trace import Trace, Value, append_event
from .oracle import interpret_compliance_oracle
from .scenario import Scenario, validate_scenario
from .templates import (
    ORACLE_EXTENSION_BOUND,
    TemplateSpec,
    catalog_letters,
    template_family,
)

#: A name absent from every catalog; proposing it exercises the
#: type-level rejection path without consuming solver budget.
UNKNOWN_TOOL_NAME = "zz_undeclared"

_BUILTIN_NAMES = frozenset(sig.name for sig in BUILTIN_TOOLS)

_PROSE = "That completes everything I can do for this request."


@dataclass(frozen=True)
class FuzzCase:
    """One runnable fuzz scenario plus the template it was drawn from."""

    seed: int
    template: TemplateSpec
    scenario: Scenario
    adversarial_rate: float


class OracleMemo:
    """Cache of oracle verdicts keyed by template and trace content."""

    def __init__(self) -> None:
        self._verdicts: dict = {}
        self._specs: dict = {}

    def compliant(self, template: TemplateSpec, trace: Trace) -> bool:
        key = (template.name,
               tuple((e.tool, e.args) for e in trace.events),
               trace.end)
        got = self._verdicts.get(key)
        if got is None:
            spec = self._specs.get(template.name)
            if spec is None:
                spec = self._specs[template.name] = template.build()
            got = interpret_compliance_oracle(
                spec, trace, ORACLE_EXTENSION_BOUND, template.domain)
            self._verdicts[key] = got
        return got


# --------------------------------------------------------------------------
# Case construction
# --------------------------------------------------------------------------


def _tool_docs(catalog: ToolCatalog) -> list[dict]:
    return [
        {"name": sig.name,
         "params": [{"name": p.name, "sort": p.sort} for p in sig.params]}
        for sig in catalog if sig.name not in _BUILTIN_NAMES
    ]


def _render_completion(tool: str, args: dict[str, Value]) -> str:
    parts = ", ".join(f'"{k}": "{v}"' for k, v in args.items())
    return ('<tool_call>{"name": "' + tool
            + '", "arguments": {' + parts + '}}</tool_call>')


def build_fuzz_case(seed: int, *,
                    family: Optional[Sequence[TemplateSpec]] = None,
                    memo: Optional[OracleMemo] = None) -> FuzzCase:
    """Deterministically construct one fuzz scenario from a seed."""
    rng = random.Random(seed)
    family = family if family is not None else template_family()
    memo = memo if memo is not None else OracleMemo()
    tpl = family[rng.randrange(len(family))]
    letters = catalog_letters(tpl.catalog, tpl.domain)
    adv_rate = rng.uniform(0.3, 0.7)
    mode = "reprompt" if rng.random() < 0.25 else "constrained"

    sim = Trace(tpl.catalog)  # the prefix the oracle expects to be accepted

    def pick_letter(want_compliant: bool):
        for i in rng.sample(range(len(letters)), len(letters)):
            tool, args = letters[i]
            if memo.compliant(tpl, append_event(sim, tool, args)) \
                    == want_compliant:
                return letters[i]
        return None

    planned: list[list[tuple[str, Optional[dict]]]] = []
    for _ in range(rng.randint(1, 4)):
        exhaust = rng.random() < 0.10
        cands: list[tuple[str, Optional[dict]]] = []
        if exhaust:
            n_adv = rng.randint(1, 3)
        else:
            n_adv = sum(rng.random() < adv_rate for _ in range(2))
        for _ in range(n_adv):
            if rng.random() < 0.08:
                cands.append((UNKNOWN_TOOL_NAME, None))
                continue
            letter = pick_letter(False)
            if letter is None:
                break  # the policy cannot be violated in one step right now
            cands.append(letter)
        if exhaust and cands:
            planned.append(cands)
            continue  # enforcement will reject everything: emit_error turn
        letter = pick_letter(True)
        if letter is None:
            break  # no acceptable next call; stop planning calls
        cands.append(letter)
        sim = append_event(sim, *letter)
        planned.append(cands)

    if mode == "constrained":
        turns = []
        for cands in planned:
            names: list = []
            arg_pairs: list = []
            for tool, args in cands:
                names.append(tool)
                if args is not None:  # unknown tools never reach an argument
                    arg_pairs.extend([k, v] for k, v in args.items())
            turns.append({"names": names, "args": arg_pairs})
        turns.append({"names": [{"text": _PROSE}], "args": []})
    else:
        turns = []
        for cands in planned:
            completions = []
            for tool, args in cands:
                completions.append(_render_completion(tool, args or {"x": "a"}))
            turns.append(completions)
        turns.append([_PROSE])

    doc = {
        "name": f"fuzz-{seed}",
        "spec": tpl.text,
        "tools": _tool_docs(tpl.catalog),
        "projections": [],
        "state_seed": None,
        "generator": {"turns": turns},
        "mode": mode,
        "harm_markers": [],
    }
    scenario = validate_scenario(doc, name=doc["name"])
    return FuzzCase(seed, tpl, scenario, adv_rate)


def build_fuzz_corpus(count: int, base_seed: int = 0) -> list[FuzzCase]:
    """`count` independent cases sharing one template family and memo."""
    family = template_family()
    memo = OracleMemo()
    return [build_fuzz_case(base_seed + i, family=family, memo=memo)
            for i in range(count)]


# --------------------------------------------------------------------------
# Oracle replay
# --------------------------------------------------------------------------


def replay_verdicts(template: TemplateSpec, trace: Trace,
                    memo: Optional[OracleMemo] = None) -> list[bool]:
    """Oracle compliance of each prefix of `trace`, length 0 upward.

    Observations and outputs are not replayed: templates never read them.
    """
    memo = memo if memo is not None else OracleMemo()
    prefix = Trace(template.catalog)
    verdicts = [memo.compliant(template, prefix)]
    for ev in trace.events:
        prefix = append_event(prefix, ev.tool, dict(ev.args))
        verdicts.append(memo.compliant(template, prefix))
    return verdicts


def soundness_violations(template: TemplateSpec, trace: Trace,
                         memo: Optional[OracleMemo] = None) -> list[int]:
    """Indices of appended events that flipped a compliant prefix to
    noncompliant — the property enforcement must make impossible."""
    verdicts = replay_verdicts(template, trace, memo)
    return [i for i in range(len(trace.events))
            if verdicts[i] and not verdicts[i + 1]]
