"""Identifier-resolved model of a behavior specification.

:func:`resolve` turns parsed declarations into a :class:`SpecModel` or raises
:class:`~behavspec.diagnostics.ResolutionError` with every problem it found.
A resolved model is treated as immutable and may be shared between scenario
evaluations.
"""

from __future__ import annotations

import dataclasses
import enum
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from behavspec.diagnostics import (
    ERROR,
    NO_SPAN,
    WARNING,
    Diagnostic,
    ResolutionError,
    Span,
    UnknownIdentifier,
    sort_diagnostics,
)
from behavspec.dsl import ast


class LayerTag(str, enum.Enum):
    L1_RoadLevel = "L1_RoadLevel"
    L2_TrafficInfrastructure = "L2_TrafficInfrastructure"
    L3_TemporaryManipulation = "L3_TemporaryManipulation"
    L4_MovableObject = "L4_MovableObject"
    L5_Environment = "L5_Environment"


LAYER_NAMES = frozenset(t.value for t in LayerTag)
DEFAULT_GRID = "EgoGrid"


@dataclass(frozen=True)
class SceneEntityClass:
    id: str
    layer: LayerTag
    parent: Optional[str]
    characteristics: tuple[str, ...]
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ParameterDecl:
    id: str
    unit: str
    range: Optional[tuple[Fraction, Fraction]] = None


@dataclass(frozen=True)
class Characteristic:
    id: str
    parent: Optional[str]
    parameters: tuple[ParameterDecl, ...]
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Zone:
    id: str
    grid: str
    neighbors: tuple[tuple[str, str], ...]
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class KnowledgeSource:
    id: str
    kind: str
    citation: str
    excerpt: Optional[str] = None
    allow: frozenset[str] = frozenset()
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Fact:
    id: str
    kind: str  # capturing | inferred | maneuver_fact
    sources: tuple[str, ...]
    description: str = ""
    allow: frozenset[str] = frozenset()
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ManeuverOption:
    id: str
    lateral: str
    longitudinal: str
    allow: frozenset[str] = frozenset()
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Mission:
    id: str
    description: str = ""
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Rule:
    id: str
    body: tuple[ast.Atom, ...]
    head: ast.Head
    sources: tuple[str, ...] = ()
    assumptions: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)

    @property
    def head_id(self) -> str:
        return self.head.fact if isinstance(self.head, ast.FactHead) else self.head.maneuver


@dataclass(frozen=True)
class ConflictGroup:
    id: str
    members: frozenset[str]
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Assumption:
    id: str
    statement: str
    attached_to: tuple[str, ...]
    analysis: str
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class AnalysisRecord:
    id: str
    premise: str
    definitions: tuple[tuple[str, str], ...]
    subsumptions: tuple[tuple[str, tuple[str, ...]], ...]
    result: str
    assumptions: tuple[str, ...]
    span: Span = field(default=NO_SPAN, compare=False)

    def referenced_ids(self) -> set[str]:
        return {ref for _, refs in self.subsumptions for ref in refs}


@dataclass(frozen=True)
class Scenario:
    id: str
    placements: frozenset[tuple[str, str, str]] = frozenset()  # (entity, class, zone)
    ego: Optional[str] = None
    mission: Optional[str] = None
    asserts: frozenset[str] = frozenset()
    expect: Optional[frozenset[str]] = None
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class SpecModel:
    classes: Mapping[str, SceneEntityClass] = field(default_factory=dict)
    characteristics: Mapping[str, Characteristic] = field(default_factory=dict)
    zones: Mapping[str, Zone] = field(default_factory=dict)
    grids: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    sources: Mapping[str, KnowledgeSource] = field(default_factory=dict)
    facts: Mapping[str, Fact] = field(default_factory=dict)
    maneuvers: Mapping[str, ManeuverOption] = field(default_factory=dict)
    missions: Mapping[str, Mission] = field(default_factory=dict)
    rules: Mapping[str, Rule] = field(default_factory=dict)
    conflict_groups: Mapping[str, ConflictGroup] = field(default_factory=dict)
    analyses: Mapping[str, AnalysisRecord] = field(default_factory=dict)
    assumptions: Mapping[str, Assumption] = field(default_factory=dict)
    scenarios: Mapping[str, Scenario] = field(default_factory=dict)
    # class id -> all ancestors including itself
    ancestors: Mapping[str, frozenset[str]] = field(default_factory=dict, compare=False, repr=False)

    def sorted_rules(self) -> list[Rule]:
        return [self.rules[k] for k in sorted(self.rules)]


def is_subclass(model: SpecModel, sub: str, sup: str) -> bool:
    """Reflexive-transitive subclass test over declared parent links."""
    for name in (sub, sup):
        if name not in model.classes:
            raise UnknownIdentifier(name)
    return sup in model.ancestors[sub]


# -- resolution ---------------------------------------------------------------


def _err(code: str, message: str, span: Span) -> Diagnostic:
    return Diagnostic(ERROR, code, message, span)


def _zone_atom(atom: ast.Atom, classes, zones) -> ast.Atom:
    """Class atoms whose predicate is a zone (and not a class) become zone atoms."""
    if isinstance(atom, ast.ClassAtom) and atom.cls not in classes and atom.cls in zones:
        return ast.ZoneAtom(atom.cls, atom.term)
    return atom


def find_cycles(parents: Mapping[str, Optional[str]]) -> list[list[str]]:
    """Cycles in a parent-pointer graph, each rotated to start at its smallest id."""
    cycles: list[list[str]] = []
    state: dict[str, int] = {}  # 1 = on current path, 2 = done
    for start in sorted(parents):
        path: list[str] = []
        node: Optional[str] = start
        while node is not None and node in parents and state.get(node) is None:
            state[node] = 1
            path.append(node)
            node = parents[node]
        if node is not None and state.get(node) == 1:
            cyc = path[path.index(node) :]
            i = cyc.index(min(cyc))
            cycles.append(cyc[i:] + cyc[:i])
        for n in path:
            state[n] = 2
    return cycles


def _ancestor_sets(parents: Mapping[str, Optional[str]]) -> dict[str, frozenset[str]]:
    out: dict[str, frozenset[str]] = {}
    for name in parents:
        seen = [name]
        node = parents[name]
        while node is not None and node in parents and node not in seen:
            seen.append(node)
            node = parents[node]
        out[name] = frozenset(seen)
    return out


class _Resolver:
    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []

    def error(self, code: str, message: str, span: Span) -> None:
        self.diags.append(_err(code, message, span))

    def unknown(self, what: str, name: str, span: Span) -> None:
        self.error("UnknownIdentifier", f"unknown {what} {name!r}", span)

    def index(self, decls: list, what: str) -> dict:
        """Key declarations by name, reporting duplicates once per name."""
        by_name: dict[str, list] = defaultdict(list)
        for d in sorted(decls, key=lambda d: d.span):
            by_name[d.name].append(d)
        out = {}
        for name, group in by_name.items():
            out[name] = group[0]
            if len(group) > 1:
                where = ", ".join(str(g.span) for g in group)
                self.error("DuplicateIdentifier", f"duplicate {what} {name!r} declared at {where}", group[1].span)
        return out

    def resolve(self, decls: Iterable[ast.RawDecl]) -> SpecModel:
        groups: dict[str, list] = defaultdict(list)
        for d in decls:
            groups[d.kind].append(d)

        class_decls = self.index(groups["class"], "class")
        char_decls = self.index(groups["characteristic"], "characteristic")
        zone_decls = self.index(groups["zone"], "zone")
        source_decls = self.index(groups["source"], "source")
        fact_decls = self.index(groups["fact"], "fact")
        man_decls = self.index(groups["maneuver"], "maneuver")
        mission_decls = self.index(groups["mission"], "mission")
        rule_decls = self.index(groups["rule"], "rule")
        conflict_decls = self.index(groups["conflict"], "conflict")
        analysis_decls = self.index(groups["analysis"], "analysis")
        scenario_decls = self.index(groups["scenario"], "scenario")

        # characteristics
        char_parents: dict[str, Optional[str]] = {}
        characteristics: dict[str, Characteristic] = {}
        for name, d in char_decls.items():
            if d.parent is not None and d.parent not in char_decls:
                self.unknown("characteristic", d.parent, d.span)
            char_parents[name] = d.parent if d.parent in char_decls else None
            params = []
            seen_params: set[str] = set()
            for p in d.params:
                if p.name in seen_params:
                    self.error("DuplicateIdentifier", f"duplicate parameter {p.name!r} in {name!r}", p.span)
                seen_params.add(p.name)
                if p.range is not None and p.range[0] > p.range[1]:
                    self.error("InvalidRange", f"parameter {p.name!r} has lower bound above upper bound", p.span)
                params.append(ParameterDecl(p.name, p.unit, p.range))
            characteristics[name] = Characteristic(name, d.parent, tuple(params), span=d.span)
        for cyc in find_cycles(char_parents):
            self.error(
                "CyclicTaxonomy",
                "characteristic hierarchy cycle: " + " -> ".join(cyc + [cyc[0]]),
                char_decls[cyc[0]].span,
            )

        # classes
        class_parents: dict[str, Optional[str]] = {}
        for name, d in class_decls.items():
            parent = d.parent
            if parent is None or parent in LAYER_NAMES:
                class_parents[name] = None
                if parent is None:
                    self.error("MissingLayer", f"root class {name!r} must declare a layer", d.span)
            elif parent in class_decls:
                class_parents[name] = parent
            else:
                class_parents[name] = None
                self.unknown("class or layer", parent, d.span)
            for c in d.characteristics:
                if c not in char_decls:
                    self.unknown("characteristic", c, d.span)
        cycles = find_cycles(class_parents)
        on_cycle = {n for cyc in cycles for n in cyc}
        for cyc in cycles:
            self.error(
                "CyclicTaxonomy",
                "class hierarchy cycle: " + " -> ".join(cyc + [cyc[0]]),
                class_decls[cyc[0]].span,
            )
        ancestors = _ancestor_sets(class_parents)
        classes: dict[str, SceneEntityClass] = {}
        for name, d in class_decls.items():
            layer = LayerTag.L1_RoadLevel
            if name not in on_cycle:
                node = name
                while class_parents.get(node) is not None:
                    node = class_parents[node]
                root_parent = class_decls[node].parent
                if root_parent in LAYER_NAMES:
                    layer = LayerTag(root_parent)
            parent = class_parents[name]
            classes[name] = SceneEntityClass(name, layer, parent, d.characteristics, span=d.span)

        # zones and grids
        zones: dict[str, Zone] = {}
        grids: dict[str, list[str]] = defaultdict(list)
        for name, d in zone_decls.items():
            grid = d.grid or DEFAULT_GRID
            zones[name] = Zone(name, grid, d.neighbors, span=d.span)
            grids[grid].append(name)
        for name, z in zones.items():
            for direction, other in z.neighbors:
                if other not in zones:
                    self.unknown("zone", other, z.span)
                elif zones[other].grid != z.grid:
                    self.error(
                        "CrossGridNeighbor",
                        f"zone {name!r} ({direction}) refers to {other!r} in another grid",
                        z.span,
                    )

        # knowledge sources
        sources: dict[str, KnowledgeSource] = {}
        for name, d in source_decls.items():
            if not d.citation.strip():
                self.error("EmptyCitation", f"source {name!r} has an empty citation", d.span)
            sources[name] = KnowledgeSource(name, d.source_kind, d.citation, d.excerpt, frozenset(d.allow), span=d.span)

        facts: dict[str, Fact] = {}
        for name, d in fact_decls.items():
            for s in d.sources:
                if s not in sources:
                    self.unknown("source", s, d.span)
            facts[name] = Fact(name, d.fact_kind, d.sources, d.desc or "", frozenset(d.allow), span=d.span)

        maneuvers: dict[str, ManeuverOption] = {}
        pairs: dict[tuple[str, str], str] = {}
        for name in sorted(man_decls, key=lambda n: man_decls[n].span):
            d = man_decls[name]
            pair = (d.lateral, d.longitudinal)
            if pair in pairs:
                self.error(
                    "DuplicateManeuverPair",
                    f"maneuver {name!r} repeats the lateral/longitudinal pair of {pairs[pair]!r}",
                    d.span,
                )
            pairs.setdefault(pair, name)
            maneuvers[name] = ManeuverOption(name, d.lateral, d.longitudinal, frozenset(d.allow), span=d.span)

        missions = {name: Mission(name, d.desc or "", span=d.span) for name, d in mission_decls.items()}

        # assumptions live inside analyses
        assumption_items: list[tuple[ast.AssumptionItem, str]] = []
        for name, d in analysis_decls.items():
            for a in d.assumptions:
                assumption_items.append((a, name))
        by_name: dict[str, list] = defaultdict(list)
        for a, owner in sorted(assumption_items, key=lambda x: x[0].span):
            by_name[a.name].append((a, owner))
        assumption_owner: dict[str, tuple[ast.AssumptionItem, str]] = {}
        for name, group in by_name.items():
            assumption_owner[name] = group[0]
            if len(group) > 1:
                where = ", ".join(str(g[0].span) for g in group)
                self.error("DuplicateIdentifier", f"duplicate assumption {name!r} declared at {where}", group[1][0].span)

        rules: dict[str, Rule] = {}
        for name, d in rule_decls.items():
            self._check_rule(d, classes, zones, facts, maneuvers, missions, sources, assumption_owner)
            body = tuple(_zone_atom(a, classes, zones) for a in d.body)
            rules[name] = Rule(name, body, d.head, d.sources, d.assumes, span=d.span)

        attached: dict[str, list[str]] = defaultdict(list)
        for r in rules.values():
            for a in r.assumptions:
                attached[a].append(r.id)
        assumptions: dict[str, Assumption] = {}
        for name, (item, owner) in assumption_owner.items():
            for ref in item.on:
                if ref not in facts and ref not in rules:
                    self.unknown("fact or rule", ref, item.span)
            targets = tuple(sorted(set(item.on) | set(attached[name])))
            assumptions[name] = Assumption(name, item.statement, targets, owner, span=item.span)

        analyses: dict[str, AnalysisRecord] = {}
        for name, d in analysis_decls.items():
            for item in d.definitions:
                if item.source not in sources:
                    self.unknown("source", item.source, d.span)
            for item in d.subsumptions:
                for ref in item.refs:
                    if ref not in facts and ref not in rules:
                        self.unknown("fact or rule", ref, d.span)
            analyses[name] = AnalysisRecord(
                name,
                d.premise or "",
                tuple((i.text, i.source) for i in d.definitions),
                tuple((i.text, i.refs) for i in d.subsumptions),
                d.result or "",
                tuple(a.name for a in d.assumptions),
                span=d.span,
            )

        conflicts: dict[str, ConflictGroup] = {}
        for name, d in conflict_decls.items():
            if len(set(d.members)) != len(d.members):
                self.error("DuplicateMember", f"conflict group {name!r} lists a maneuver twice", d.span)
            if len(set(d.members)) < 2:
                self.error("ConflictTooSmall", f"conflict group {name!r} needs at least two maneuvers", d.span)
            for m in d.members:
                if m not in maneuvers:
                    self.unknown("maneuver", m, d.span)
            conflicts[name] = ConflictGroup(name, frozenset(d.members), span=d.span)

        model = SpecModel(
            classes=classes,
            characteristics=characteristics,
            zones=zones,
            grids={g: tuple(sorted(zs)) for g, zs in grids.items()},
            sources=sources,
            facts=facts,
            maneuvers=maneuvers,
            missions=missions,
            rules=rules,
            conflict_groups=conflicts,
            analyses=analyses,
            assumptions=assumptions,
            ancestors=ancestors,
        )
        scenarios = {}
        for name, d in scenario_decls.items():
            scenarios[name] = self.scenario(model, d)
        return _with_scenarios(model, scenarios)

    def _check_rule(self, d: ast.RuleDecl, classes, zones, facts, maneuvers, missions, sources, assumptions) -> None:
        for s in d.sources:
            if s not in sources:
                self.unknown("source", s, d.span)
        for a in d.assumes:
            if a not in assumptions:
                self.unknown("assumption", a, d.span)
        body_vars = set()
        for atom in d.body:
            body_vars.update(t for t in ast.atom_terms(atom) if isinstance(t, ast.Var))
            if isinstance(atom, ast.ClassAtom) and atom.cls not in classes and atom.cls not in zones:
                self.unknown("class", atom.cls, d.span)
            elif isinstance(atom, ast.InZoneAtom) and isinstance(atom.zone, str) and atom.zone not in zones:
                self.unknown("zone", atom.zone, d.span)
            elif isinstance(atom, ast.AppliesAtom) and atom.fact not in facts:
                self.unknown("fact", atom.fact, d.span)
            elif isinstance(atom, ast.MissionAtom) and atom.mission not in missions:
                self.unknown("mission", atom.mission, d.span)
        if isinstance(d.head, ast.FactHead) and d.head.fact not in facts:
            self.unknown("fact", d.head.fact, d.span)
        if isinstance(d.head, ast.ManeuverHead) and d.head.maneuver not in maneuvers:
            self.unknown("maneuver", d.head.maneuver, d.span)

    def scenario(self, model: SpecModel, d: ast.ScenarioDecl) -> Scenario:
        placements: set[tuple[str, str, str]] = set()
        entity_class: dict[str, str] = {}

        def place(entity: str, cls: str, zone: str, span: Span) -> None:
            if cls not in model.classes:
                self.unknown("class", cls, span)
            if zone not in model.zones:
                self.unknown("zone", zone, span)
            if entity in entity_class and entity_class[entity] != cls:
                self.error(
                    "ConflictingEntityClass",
                    f"entity {entity!r} placed as both {entity_class[entity]!r} and {cls!r}",
                    span,
                )
            entity_class.setdefault(entity, cls)
            placements.add((entity, cls, zone))

        for p in d.placements:
            place(p.entity, p.cls, p.zone, p.span)
        ego = mission = None
        if d.ego is not None:
            ego, mission = d.ego.entity, d.ego.mission
            if mission not in model.missions:
                self.unknown("mission", mission, d.ego.span)
            cls = d.ego.cls or entity_class.get(ego)
            if cls is None:
                self.error("MissingEgoClass", f"ego {ego!r} has no class; write 'ego {ego} : <Class> ...'", d.ego.span)
            else:
                place(ego, cls, d.ego.zone, d.ego.span)
        for f in d.asserts:
            if f not in model.facts:
                self.unknown("fact", f, d.span)
            elif model.facts[f].kind != "capturing":
                self.error("AssertedNonCapturingFact", f"only capturing facts may be asserted, not {f!r}", d.span)
        expect = None
        if d.expect is not None:
            for m in d.expect:
                if m not in model.maneuvers:
                    self.unknown("maneuver", m, d.span)
            expect = frozenset(d.expect)
        return Scenario(d.name, frozenset(placements), ego, mission, frozenset(d.asserts), expect, span=d.span)


def _with_scenarios(model: SpecModel, scenarios: dict[str, Scenario]) -> SpecModel:
    return dataclasses.replace(model, scenarios=scenarios)


def resolve(decls: Iterable[ast.RawDecl]) -> SpecModel:
    """Resolve every cross-reference, or raise ResolutionError listing all failures."""
    r = _Resolver()
    model = r.resolve(list(decls))
    if r.diags:
        raise ResolutionError(r.diags)
    return model


def resolve_scenario(model: SpecModel, decl: ast.ScenarioDecl) -> Scenario:
    r = _Resolver()
    scen = r.scenario(model, decl)
    if r.diags:
        raise ResolutionError(r.diags)
    return scen


# -- static validation --------------------------------------------------------


def _warn(code: str, message: str, span: Span) -> Diagnostic:
    return Diagnostic(WARNING, code, message, span)


def validate_model(model: SpecModel, strict_traceability: bool = False) -> list[Diagnostic]:
    """Static checks on a resolved model, ordered by source position.

    Warnings flag inferred facts no rule can derive, unreferenced knowledge
    sources, maneuvers no rule concludes and names reused across kinds. In
    strict mode every fact and rule must cite at least one knowledge source.
    """
    out: list[Diagnostic] = []

    # defensive re-checks; resolve() already rejects these
    parents = {c.id: c.parent for c in model.classes.values()}
    for cyc in find_cycles(parents):
        out.append(_err("CyclicTaxonomy", "class hierarchy cycle: " + " -> ".join(cyc), model.classes[cyc[0]].span))
    for r in model.rules.values():
        refs = list(r.sources) + list(r.assumptions)
        known = set(model.sources) | set(model.assumptions)
        for ref in refs:
            if ref not in known:
                out.append(_err("UnknownIdentifier", f"rule {r.id!r} refers to unknown {ref!r}", r.span))

    heads = {r.head_id for r in model.rules.values()}
    for f in model.facts.values():
        if f.kind == "inferred" and f.id not in heads and "UnderivableFact" not in f.allow:
            out.append(_warn("UnderivableFact", f"inferred fact {f.id!r} is not concluded by any rule", f.span))
        if strict_traceability and not f.sources and "MissingSourceLink" not in f.allow:
            out.append(_err("MissingSourceLink", f"fact {f.id!r} cites no knowledge source", f.span))
    if strict_traceability:
        for r in model.rules.values():
            if not r.sources:
                out.append(_err("MissingSourceLink", f"rule {r.id!r} cites no knowledge source", r.span))

    for m in model.maneuvers.values():
        if m.id not in heads and "UnreachableManeuver" not in m.allow:
            out.append(_warn("UnreachableManeuver", f"maneuver {m.id!r} is not concluded by any rule", m.span))

    cited: set[str] = set()
    for f in model.facts.values():
        cited.update(f.sources)
    for r in model.rules.values():
        cited.update(r.sources)
    for a in model.analyses.values():
        cited.update(s for _, s in a.definitions)
    for s in model.sources.values():
        if s.id not in cited and "UnusedSource" not in s.allow:
            out.append(_warn("UnusedSource", f"knowledge source {s.id!r} is never referenced", s.span))

    namespaces = {
        "class": model.classes,
        "zone": model.zones,
        "source": model.sources,
        "fact": model.facts,
        "maneuver": model.maneuvers,
        "mission": model.missions,
        "rule": model.rules,
    }
    owners: dict[str, list[str]] = defaultdict(list)
    for kind, coll in namespaces.items():
        for name in coll:
            owners[name].append(kind)
    for name, kinds in owners.items():
        if len(kinds) > 1:
            span = min(namespaces[k][name].span for k in kinds)
            out.append(_warn("SharedName", f"{name!r} is declared as {' and '.join(kinds)}", span))
    return sort_diagnostics(out)
