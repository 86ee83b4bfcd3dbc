"""Command-line front end.

Subcommands:

- ``validate <spec>``: parse and validate a policy file (exit 0, or
  diagnostics on stderr and exit 1).
- ``nnf <spec>``: print the policy in negation normal form.
- ``fol <spec> [--smtlib <out>]``: print the first-order translation;
  optionally write the full SMT-LIB script for an empty trace.
- ``check --spec <f> --trace <f> [--timeout <ms>] [--dump-smt <out>]``:
  decide trace compliance; prints Compliant/NonCompliant/Unknown with
  exit code 0/1/2.
- ``run <scenario> [--mode ...] [--seed <n>] [--metrics <out>]
  [--unguarded]``: execute a scenario session and print a JSON report.
  ``<scenario>`` is a JSON file path or the name of a bundled scenario.
- ``grammar-dump``: print the embedded tool-call grammar.

Policies default to the bundled mini-retail catalog; ``--world`` points at
a JSON file with custom ``tools`` and ``projections`` signature lists.
Usage errors exit 64; malformed input files exit 65.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .compliance import (
    COMPLIANT,
    DEFAULT_TIMEOUT_MS,
    NONCOMPLIANT,
    check_compliance,
    contract_artifacts,
)
from .dsl import parse_spec, validate_spec
from .dsl.ast import format_spec
from .dsl.catalog import (
    ProjectionCatalog,
    ProjectionParam,
    ProjectionSig,
    ToolCatalog,
    ToolParam,
    ToolSig,
)
from .dsl.nnf import to_nnf
from .errors import AgentcError
from .fol import format_formula, translate_spec
from .grammar.toolcall import GRAMMAR_TEXT
from .harness.retail import retail_catalog, retail_projection_catalog
from .harness.scenario import load_scenario, run_scenario, validate_scenario
from .harness.suite import SCENARIO_DOCS
from .trace import Trace, load_trace

USAGE_ERROR = 64
DATA_ERROR = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _build_parser() -> _Parser:
    parser = _Parser(prog="agentc",
                     description="Policy enforcement toolkit for "
                                 "tool-calling agents.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("validate", help="parse and validate a policy file")
    p.add_argument("spec", help="path to a policy file")
    p.add_argument("--world", help="JSON file with custom tools/projections")

    p = sub.add_parser("nnf", help="print the negation-normal form")
    p.add_argument("spec")
    p.add_argument("--world")

    p = sub.add_parser("fol", help="print the first-order translation")
    p.add_argument("spec")
    p.add_argument("--world")
    p.add_argument("--smtlib", metavar="OUT",
                   help="also write an SMT-LIB script for an empty trace")

    p = sub.add_parser("check", help="decide compliance of a recorded trace")
    p.add_argument("--spec", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--world")
    p.add_argument("--timeout", type=int, default=DEFAULT_TIMEOUT_MS,
                   metavar="MS", help="solver timeout in milliseconds")
    p.add_argument("--dump-smt", metavar="OUT",
                   help="write the SMT-LIB encoding of the query")

    p = sub.add_parser("run", help="execute a scenario session")
    p.add_argument("scenario",
                   help="scenario JSON path or bundled scenario name")
    p.add_argument("--mode", choices=("constrained", "reprompt"),
                   help="override the scenario's generator mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", metavar="OUT",
                   help="also write the metrics object to a file")
    p.add_argument("--unguarded", action="store_true",
                   help="run without enforcement (baseline interpreter)")

    sub.add_parser("grammar-dump", help="print the tool-call grammar")
    return parser


# --------------------------------------------------------------------------
# Shared loading helpers
# --------------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        print(f"agentc: cannot read {path}: {exc.strerror}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _load_world(path: Optional[str]) -> tuple[ToolCatalog, ProjectionCatalog]:
    if path is None:
        return retail_catalog(), retail_projection_catalog()
    try:
        doc = json.loads(_read(path))
        tools = [
            ToolSig(t["name"], tuple(
                ToolParam(p["name"], p["sort"]) for p in t.get("params", [])))
            for t in doc.get("tools", [])
        ]
        projections = [
            ProjectionSig(s["name"], tuple(
                ProjectionParam(p["name"], p["sort"])
                for p in s.get("params", [])), s["return_sort"])
            for s in doc.get("projections", [])
        ]
    except (json.JSONDecodeError, KeyError, TypeError, AgentcError) as exc:
        print(f"agentc: malformed world file {path}: {exc}", file=sys.stderr)
        raise SystemExit(DATA_ERROR)
    return ToolCatalog(tuple(tools)), ProjectionCatalog(tuple(projections))


def _load_spec(path: str, world: Optional[str]):
    catalog, projections = _load_world(world)
    text = _read(path)
    try:
        return validate_spec(parse_spec(text), catalog, projections)
    except AgentcError as exc:
        print(f"agentc: invalid policy {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    _load_spec(args.spec, args.world)
    print("valid")
    return 0


def _cmd_nnf(args) -> int:
    spec = _load_spec(args.spec, args.world)
    print(format_spec(to_nnf(spec.ast)))
    return 0


def _cmd_fol(args) -> int:
    spec = _load_spec(args.spec, args.world)
    print(format_formula(translate_spec(spec)))
    if args.smtlib:
        Path(args.smtlib).write_text(
            contract_artifacts(spec, Trace(spec.catalog)))
    return 0


def _cmd_check(args) -> int:
    spec = _load_spec(args.spec, args.world)
    try:
        trace = load_trace(_read(args.trace), spec.catalog)
    except AgentcError as exc:
        print(f"agentc: malformed trace {args.trace}: {exc}", file=sys.stderr)
        return DATA_ERROR
    if args.dump_smt:
        Path(args.dump_smt).write_text(contract_artifacts(spec, trace))
    verdict = check_compliance(spec, trace, timeout_ms=args.timeout)
    if verdict.status == COMPLIANT:
        print("Compliant")
        return 0
    if verdict.status == NONCOMPLIANT:
        print("NonCompliant")
        return 1
    print("Unknown")
    if verdict.reason:
        print(f"agentc: {verdict.reason}", file=sys.stderr)
    return 2


def _bundled_doc(name: str) -> Optional[dict]:
    for doc in SCENARIO_DOCS:
        if doc.get("name") == name:
            return dict(doc)
    return None


def _cmd_run(args) -> int:
    path = Path(args.scenario)
    try:
        if path.exists():
            if args.mode is None:
                scenario = load_scenario(str(path))
            else:
                doc = json.loads(path.read_text())
                doc["mode"] = args.mode
                scenario = validate_scenario(doc, name=path.stem)
        else:
            doc = _bundled_doc(args.scenario)
            if doc is None:
                print(f"agentc: no such file or bundled scenario: "
                      f"{args.scenario}", file=sys.stderr)
                return USAGE_ERROR
            if args.mode is not None:
                doc["mode"] = args.mode
            scenario = validate_scenario(doc, name=args.scenario)
    except (json.JSONDecodeError, AgentcError) as exc:
        print(f"agentc: invalid scenario: {exc}", file=sys.stderr)
        return DATA_ERROR

    result = run_scenario(scenario, seed=args.seed,
                          enforced=not args.unguarded)
    report = {
        "name": scenario.name,
        "mode": scenario.mode,
        "enforced": not args.unguarded,
        "seed": args.seed,
        "end": result.trace.end,
        "final_text": result.run.final_text if result.run else None,
        "events": [
            {"tool": ev.tool, "args": dict(ev.args), "output": ev.output}
            for ev in result.trace.events
        ],
        "metrics": result.metrics.as_dict(),
    }
    print(json.dumps(report, sort_keys=True, indent=2))
    if args.metrics:
        Path(args.metrics).write_text(
            json.dumps(result.metrics.as_dict(), sort_keys=True, indent=2)
            + "\n")
    return 0


def _cmd_grammar_dump(_args) -> int:
    print(GRAMMAR_TEXT, end="" if GRAMMAR_TEXT.endswith("\n") else "\n")
    return 0


_HANDLERS = {
    "validate": _cmd_validate,
    "nnf": _cmd_nnf,
    "fol": _cmd_fol,
    "check": _cmd_check,
    "run": _cmd_run,
    "grammar-dump": _cmd_grammar_dump,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    return _HANDLERS[args.command](args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
