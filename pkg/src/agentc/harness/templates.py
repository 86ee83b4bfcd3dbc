"""Curated family of small policy templates.

The equivalence harness needs many structurally diverse policies that are
cheap to decide both by the solver-backed checker and by the brute-force
oracle.  Every template here ranges over at most three tools with one string
argument each and a two-value domain, and every pending obligation can be
discharged within a handful of events, so a bounded-extension oracle with
`ORACLE_EXTENSION_BOUND` steps decides it exactly.

The family mixes five hand-written showcase policies (file-handle hygiene,
resource lifecycle, forbidden-path, required-call), a three-stage pipeline
expressed as a conjunction of sequencing predicates, and a deterministic
generated sweep over every predicate shape, negation, and two-predicate
boolean combination.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterator, Sequence

from ..dsl import parse_spec, validate_spec
from ..dsl.catalog import (
    BUILTIN_TOOLS,
    ProjectionCatalog,
    ToolCatalog,
    ToolParam,
    ToolSig,
)
from ..dsl.validate import ValidatedSpec
from ..trace import Trace, Value, append_event

#: Extension depth that suffices to discharge any template's obligations.
#: The worst case is a conjunction of two response-requirement predicates
#: chained through a shared tool: up to two distinct pending argument values
#: each (the domain size), discharged by two events that themselves trigger
#: the second conjunct — four events, then a safe end.
ORACLE_EXTENSION_BOUND = 4

_NO_PROJECTIONS = ProjectionCatalog()
_BUILTIN_NAMES = frozenset(sig.name for sig in BUILTIN_TOOLS)


def _catalog(arg: str, *tools: str) -> ToolCatalog:
    return ToolCatalog(tuple(
        ToolSig(t, (ToolParam(arg, "string"),)) for t in tools))


GENERATED_TOOLS = ("t0", "t1", "t2")
GENERATED_DOMAIN = ("a", "b")


def generated_catalog() -> ToolCatalog:
    """Three one-argument string tools: the alphabet of the generated sweep."""
    return _catalog("x", *GENERATED_TOOLS)


@dataclass(frozen=True)
class TemplateSpec:
    """One ready-to-validate policy plus the world it is stated over."""

    name: str
    text: str
    catalog: ToolCatalog
    domain: tuple[str, ...]

    def build(self) -> ValidatedSpec:
        return validate_spec(parse_spec(self.text), self.catalog,
                             _NO_PROJECTIONS)


# --------------------------------------------------------------------------
# Hand-written showcase templates
# --------------------------------------------------------------------------

_FILE_CATALOG = _catalog("file", "read", "open", "close")
_RESOURCE_CATALOG = _catalog("resource", "use", "dispose", "create")
_PATH_CATALOG = _catalog("path", "rm", "mkdir", "stat")


def showcase_templates() -> list[TemplateSpec]:
    """Five idiomatic policies, one per predicate shape."""
    return [
        TemplateSpec(
            "read-requires-prior-open",
            'before(read(file = f1), true, open(file = f2), f1 == f2)',
            _FILE_CATALOG, ("a", "b")),
        TemplateSpec(
            "open-requires-later-close",
            'after(open(file = f1), true, close(file = f2), f1 == f2)',
            _FILE_CATALOG, ("a", "b")),
        TemplateSpec(
            "used-resource-123-gets-disposed",
            'seq(use(resource = r1), r1 == "123", '
            'dispose(resource = r2), r1 == r2)',
            _RESOURCE_CATALOG, ("123", "456")),
        TemplateSpec(
            "never-remove-root",
            'forall(rm(path = p), p != "/root")',
            _PATH_CATALOG, ("/root", "/tmp")),
        TemplateSpec(
            "must-create-resource-456",
            'exists(create(resource = rid), rid == "456")',
            _RESOURCE_CATALOG, ("123", "456")),
    ]


def pipeline_template() -> TemplateSpec:
    """Three-stage pipeline: a conjunction of sequencing predicates stating
    stage0 -> stage1, stage1 -> stage2, and stage0 -> stage2, all on the
    same marker value."""
    text = (
        'seq(t0(x = a1), a1 == "a", t1(x = a2), a1 == a2)'
        ' && seq(t1(x = b1), b1 == "a", t2(x = b2), b1 == b2)'
        ' && seq(t0(x = c1), c1 == "a", t2(x = c2), c1 == c2)')
    return TemplateSpec("three-stage-pipeline", text,
                        generated_catalog(), GENERATED_DOMAIN)


# --------------------------------------------------------------------------
# Generated sweep
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Atom:
    name: str
    text: str
    negatable: bool  # whether the sweep also includes its negation


def _generated_atoms() -> list[_Atom]:
    """Every atomic predicate shape over the generated catalog, in a fixed
    deterministic order.  Constant-constrained variants are not negated
    (their negations add no new structure beyond the negated base shapes)."""
    atoms: list[_Atom] = []
    tools = GENERATED_TOOLS
    for t in tools:
        for v in GENERATED_DOMAIN:
            atoms.append(_Atom(f"{t}-arg-never-{v}",
                               f'forall({t}(x = p), p != "{v}")', False))
            atoms.append(_Atom(f"{t}-arg-always-{v}",
                               f'forall({t}(x = p), p == "{v}")', True))
            atoms.append(_Atom(f"{t}-called-with-{v}",
                               f'exists({t}(x = r), r == "{v}")', False))
        atoms.append(_Atom(f"{t}-called", f'exists({t}(x = .*), true)', True))
    for t1, t2 in permutations(tools, 2):
        atoms.append(_Atom(
            f"{t1}-needs-prior-{t2}",
            f'before({t1}(x = f1), true, {t2}(x = f2), f1 == f2)', True))
        atoms.append(_Atom(
            f"{t1}-needs-later-{t2}",
            f'after({t1}(x = f1), true, {t2}(x = f2), f1 == f2)', True))
        atoms.append(_Atom(
            f"{t1}-then-{t2}-linked",
            f'seq({t1}(x = r1), true, {t2}(x = r2), r1 == r2)', True))
        for v in GENERATED_DOMAIN:
            atoms.append(_Atom(
                f"{t1}-{v}-needs-prior-{t2}-{v}",
                f'before({t1}(x = f1), f1 == "{v}", '
                f'{t2}(x = f2), f2 == "{v}")', False))
            atoms.append(_Atom(
                f"{t1}-{v}-needs-later-{t2}",
                f'after({t1}(x = f1), f1 == "{v}", {t2}(x = f2), true)',
                False))
            atoms.append(_Atom(
                f"{t1}-{v}-then-{t2}-linked",
                f'seq({t1}(x = r1), r1 == "{v}", {t2}(x = r2), r1 == r2)',
                False))
    return atoms


def _generated_pairs(atoms: Sequence[_Atom],
                     count: int) -> list[tuple[str, str]]:
    """Deterministic two-predicate boolean combinations."""
    out = []
    n = len(atoms)
    for idx in range(count):
        a = atoms[idx % n]
        b = atoms[(idx * 7 + 13) % n]
        if b.name == a.name:
            b = atoms[(idx * 7 + 14) % n]
        op, word = ("&&", "and") if idx % 2 == 0 else ("||", "or")
        out.append((f"{a.name}--{word}--{b.name}",
                    f"({a.text}) {op} ({b.text})"))
    return out


def template_family(*, pair_count: int = 102) -> list[TemplateSpec]:
    """The full deterministic family: showcase + pipeline + generated sweep.

    With the default pair budget the family has well over two hundred
    members, each validating against its own catalog.
    """
    cat = generated_catalog()
    entries = showcase_templates()
    entries.append(pipeline_template())
    atoms = _generated_atoms()
    swept: list[tuple[str, str]] = [(a.name, a.text) for a in atoms]
    swept.extend((f"not--{a.name}", f"~({a.text})")
                 for a in atoms if a.negatable)
    swept.extend(_generated_pairs(atoms, pair_count))
    seen = {e.name for e in entries}
    for name, text in swept:
        if name in seen:  # pragma: no cover - names are constructed unique
            raise ValueError(f"duplicate template name {name}")
        seen.add(name)
        entries.append(TemplateSpec(name, text, cat, GENERATED_DOMAIN))
    return entries


# --------------------------------------------------------------------------
# Exhaustive trace enumeration
# --------------------------------------------------------------------------


def catalog_letters(catalog: ToolCatalog,
                    domain: Sequence[Value]) -> list[tuple[str, dict[str, Value]]]:
    """Every (tool, argument assignment) over the catalog's non-builtin
    tools."""
    letters = []
    for sig in catalog:
        if sig.name in _BUILTIN_NAMES:
            continue
        for combo in product(domain, repeat=len(sig.params)):
            letters.append((sig.name,
                            {p.name: v for p, v in zip(sig.params, combo)}))
    return letters


def enumerate_traces(catalog: ToolCatalog, domain: Sequence[Value],
                     max_len: int) -> Iterator[Trace]:
    """All open traces of length 0..max_len over the catalog and domain."""
    letters = catalog_letters(catalog, domain)
    for length in range(max_len + 1):
        for combo in product(letters, repeat=length):
            t = Trace(catalog)
            for tool, args in combo:
                t = append_event(t, tool, args)
            yield t
