"""Raw declarations as produced by the parser.

Every declaration carries a ``span`` that is excluded from equality, so two
parses of differently formatted but equivalent text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from behavspec.diagnostics import NO_SPAN, Span


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


Term = Union[Var, str]


# -- rule atoms ---------------------------------------------------------------


@dataclass(frozen=True)
class ClassAtom:
    cls: str
    term: Term


@dataclass(frozen=True)
class InZoneAtom:
    entity: Term
    zone: Term


@dataclass(frozen=True)
class AppliesAtom:
    fact: str


@dataclass(frozen=True)
class MissionAtom:
    mission: str


@dataclass(frozen=True)
class ZoneAtom:
    """A zone name used as a unary predicate, ``EgoZone(?z)``.

    The parser always produces :class:`ClassAtom`; resolution rewrites class
    atoms whose predicate names a zone into this form.
    """

    zone: str
    term: Term


Atom = Union[ClassAtom, InZoneAtom, AppliesAtom, MissionAtom, ZoneAtom]


@dataclass(frozen=True)
class FactHead:
    fact: str


@dataclass(frozen=True)
class ManeuverHead:
    maneuver: str


Head = Union[FactHead, ManeuverHead]


def atom_terms(atom: Atom) -> tuple[Term, ...]:
    if isinstance(atom, (ClassAtom, ZoneAtom)):
        return (atom.term,)
    if isinstance(atom, InZoneAtom):
        return (atom.entity, atom.zone)
    return ()


# -- declarations -------------------------------------------------------------


@dataclass(frozen=True)
class ClassDecl:
    name: str
    parent: Optional[str] = None  # layer tag or parent class name, as written
    characteristics: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "class"


@dataclass(frozen=True)
class ParamDecl:
    name: str
    unit: str
    range: Optional[tuple[Fraction, Fraction]] = None
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class CharacteristicDecl:
    name: str
    parent: Optional[str] = None
    params: tuple[ParamDecl, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "characteristic"


@dataclass(frozen=True)
class ZoneDecl:
    name: str
    grid: Optional[str] = None
    neighbors: tuple[tuple[str, str], ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "zone"


@dataclass(frozen=True)
class SourceDecl:
    name: str
    source_kind: str
    citation: str
    excerpt: Optional[str] = None
    allow: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "source"


@dataclass(frozen=True)
class FactDecl:
    name: str
    fact_kind: str
    sources: tuple[str, ...] = ()
    desc: Optional[str] = None
    allow: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "fact"


@dataclass(frozen=True)
class ManeuverDecl:
    name: str
    lateral: str
    longitudinal: str
    allow: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "maneuver"


@dataclass(frozen=True)
class MissionDecl:
    name: str
    desc: Optional[str] = None
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "mission"


@dataclass(frozen=True)
class RuleDecl:
    name: str
    body: tuple[Atom, ...]
    head: Head
    sources: tuple[str, ...] = ()
    assumes: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "rule"


@dataclass(frozen=True)
class ConflictDecl:
    name: str
    members: tuple[str, ...]
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "conflict"


@dataclass(frozen=True)
class DefinitionItem:
    text: str
    source: str


@dataclass(frozen=True)
class SubsumptionItem:
    text: str
    refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class AssumptionItem:
    name: str
    statement: str
    on: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class AnalysisDecl:
    name: str
    premise: Optional[str] = None
    definitions: tuple[DefinitionItem, ...] = ()
    subsumptions: tuple[SubsumptionItem, ...] = ()
    result: Optional[str] = None
    assumptions: tuple[AssumptionItem, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "analysis"


@dataclass(frozen=True)
class Placement:
    entity: str
    cls: str
    zone: str
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class EgoDecl:
    entity: str
    cls: Optional[str]
    mission: str
    zone: str
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ScenarioDecl:
    name: str
    placements: tuple[Placement, ...] = ()
    ego: Optional[EgoDecl] = None
    asserts: tuple[str, ...] = ()
    expect: Optional[tuple[str, ...]] = None
    span: Span = field(default=NO_SPAN, compare=False)
    kind = "scenario"


RawDecl = Union[
    ClassDecl,
    CharacteristicDecl,
    ZoneDecl,
    SourceDecl,
    FactDecl,
    ManeuverDecl,
    MissionDecl,
    RuleDecl,
    ConflictDecl,
    AnalysisDecl,
    ScenarioDecl,
]
