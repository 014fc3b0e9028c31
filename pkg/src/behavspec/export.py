"""Exchange artifacts: Causal Behavior Graph, DOT, sequence text, result document.

All emitters are deterministic: structurally equal inputs give identical text.
"""

from __future__ import annotations

import graphlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from behavspec.consistency import ConsistencyReport, SuiteReport
from behavspec.diagnostics import NoEgo
from behavspec.model import SpecModel
from behavspec.reasoner import (
    DerivationStep,
    EntityIn,
    FactApplies,
    GroundAssertion,
    InferenceResult,
    ManeuverApplies,
    MissionIs,
    assertion_id,
    assertion_key,
)

SHAPES = {"fact": "ellipse", "maneuver": "box", "entity": "plaintext", "mission": "plaintext"}


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    kind: str  # fact | maneuver | entity | mission


@dataclass(frozen=True, order=True)
class Edge:
    src: str
    dst: str
    rule: str


@dataclass(frozen=True)
class CausalBehaviorGraph:
    nodes: Mapping[str, Node] = field(default_factory=dict)
    edges: frozenset[Edge] = frozenset()

    def successors(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            out[e.src].add(e.dst)
        return out

    def sinks(self) -> set[str]:
        return {n for n, succ in self.successors().items() if not succ}

    def __eq__(self, other):
        if not isinstance(other, CausalBehaviorGraph):
            return NotImplemented
        return dict(self.nodes) == dict(other.nodes) and self.edges == other.edges

    def __hash__(self):
        return hash((frozenset(self.nodes.items()), self.edges))


def node_id(a: GroundAssertion) -> str:
    if isinstance(a, EntityIn):
        return f"entity:{a.entity}@{a.zone}"
    if isinstance(a, MissionIs):
        return f"mission:{a.mission}"
    if isinstance(a, FactApplies):
        return f"fact:{a.fact}"
    return f"maneuver:{a.maneuver}"


def _node(a: GroundAssertion) -> Node:
    if isinstance(a, EntityIn):
        return Node(node_id(a), f"{a.entity} : {a.cls} in {a.zone}", "entity")
    if isinstance(a, MissionIs):
        return Node(node_id(a), f"mission {a.mission}", "mission")
    if isinstance(a, FactApplies):
        return Node(node_id(a), a.fact, "fact")
    return Node(node_id(a), a.maneuver, "maneuver")


def build_cbg(model: SpecModel, result: InferenceResult, *, include_entities: bool = True) -> CausalBehaviorGraph:
    """Graph with one node per derived fact/maneuver and per contributing base assertion.

    Edges come from every step in the iteration where its conclusion first
    appeared, so each edge points from an earlier-seen to a later-seen node.
    """
    nodes: dict[str, Node] = {}
    edges: set[Edge] = set()

    def keep(a: GroundAssertion) -> bool:
        return include_entities or not isinstance(a, (EntityIn, MissionIs))

    for a in result.derived - result.base:
        nodes[node_id(a)] = _node(a)
    for step in result.steps:
        if step.rule not in model.rules:
            raise ValueError(f"step refers to unknown rule {step.rule!r}")
        if step.iteration != result.first_seen[step.conclusion]:
            # a re-derivation may lean on something derived later, which
            # would close a cycle; only first-round derivations become edges
            continue
        dst = node_id(step.conclusion)
        nodes.setdefault(dst, _node(step.conclusion))
        for p in step.premises:
            if not keep(p):
                continue
            nodes.setdefault(node_id(p), _node(p))
            edges.add(Edge(node_id(p), dst, step.rule))
    if not result.steps:
        # nothing fired: keep the scene itself visible
        for a in result.base:
            if keep(a):
                nodes[node_id(a)] = _node(a)
    # an entity placed in one zone under several classes shares a node
    classes: dict[str, set[str]] = {}
    for a in result.base:
        if isinstance(a, EntityIn):
            classes.setdefault(node_id(a), set()).add(a.cls)
    for nid, node in nodes.items():
        if node.kind == "entity" and len(classes.get(nid, ())) > 1:
            entity, zone = nid[len("entity:"):].rsplit("@", 1)
            nodes[nid] = Node(nid, f"{entity} : {', '.join(sorted(classes[nid]))} in {zone}", "entity")
    graph = CausalBehaviorGraph(nodes, frozenset(edges))
    check_acyclic(graph)
    return graph


def union(graphs: Iterable[CausalBehaviorGraph]) -> CausalBehaviorGraph:
    nodes: dict[str, Node] = {}
    edges: set[Edge] = set()
    for g in graphs:
        nodes.update(g.nodes)
        edges |= g.edges
    graph = CausalBehaviorGraph(nodes, frozenset(edges))
    check_acyclic(graph)
    return graph


def check_acyclic(graph: CausalBehaviorGraph) -> None:
    """Raise graphlib.CycleError if the graph has a cycle."""
    ts = graphlib.TopologicalSorter()
    for n in graph.nodes:
        ts.add(n)
    for e in graph.edges:
        ts.add(e.dst, e.src)
    ts.prepare()


def validate_cbg(model: SpecModel, graph: CausalBehaviorGraph, results: Iterable[InferenceResult]) -> list[str]:
    """Problems with a graph: cycles, unknown rule labels, maneuver out-edges, unsupported edges."""
    problems = []
    try:
        check_acyclic(graph)
    except graphlib.CycleError as exc:
        problems.append(f"cycle: {exc.args[1]}")
    step_edges: set[Edge] = set()
    for r in results:
        for s in r.steps:
            for p in s.premises:
                step_edges.add(Edge(node_id(p), node_id(s.conclusion), s.rule))
    for e in sorted(graph.edges):
        if e.rule not in model.rules:
            problems.append(f"edge {e.src} -> {e.dst} labeled with unknown rule {e.rule}")
        if e.src in graph.nodes and graph.nodes[e.src].kind == "maneuver":
            problems.append(f"maneuver node {e.src} has an outgoing edge")
        if e not in step_edges:
            problems.append(f"edge {e.src} -> {e.dst} [{e.rule}] matches no derivation step")
    return problems


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def emit_dot(graph: CausalBehaviorGraph, name: str = "CausalBehaviorGraph") -> str:
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    for nid in sorted(graph.nodes):
        n = graph.nodes[nid]
        lines.append(f"  {_quote(nid)} [label={_quote(n.label)}, shape={SHAPES[n.kind]}];")
    for e in sorted(graph.edges):
        lines.append(f"  {_quote(e.src)} -> {_quote(e.dst)} [label={_quote(e.rule)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- sequence diagram ---------------------------------------------------------


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    label: str
    iteration: int


@dataclass(frozen=True)
class SequenceDiagram:
    lifelines: tuple[str, ...]
    messages: tuple[Message, ...]
    notes: tuple[str, ...] = ()


def _first_step(steps: list[DerivationStep]) -> DerivationStep:
    return min(steps, key=lambda s: (s.iteration, s.rule, s.binding))


def sequence_diagram(model: SpecModel, result: InferenceResult) -> SequenceDiagram:
    """Lifelines are scene entities; facts become messages towards the ego-vehicle.

    A capturing fact is sent by the first non-ego entity its first derivation
    matched, with a note when other derivations in that iteration involve
    further entities; inferred facts and maneuvers are ego self-messages. Capturing
    facts that only involve the ego itself produce no message. Messages are
    ordered by iteration, then by rule declaration order.
    """
    ego = result.ego
    if ego is None:
        raise NoEgo(result.scenario_id or "scenario has no ego")
    entities = sorted({a.entity for a in result.base if isinstance(a, EntityIn)} - {ego})
    lifelines = (ego, *entities)

    by_conclusion: dict[GroundAssertion, list[DerivationStep]] = defaultdict(list)
    for s in result.steps:
        by_conclusion[s.conclusion].append(s)

    def order(a: GroundAssertion):
        # within one iteration, follow the declaration order of the deriving rule
        step = _first_step(by_conclusion[a])
        rule = model.rules.get(step.rule)
        return (result.first_seen.get(a, 0), rule.span if rule else None, assertion_key(a))

    messages: list[Message] = []
    notes: list[str] = []
    for a in sorted(result.derived - result.base, key=order):
        iteration = result.first_seen.get(a, 0)
        if isinstance(a, ManeuverApplies):
            messages.append(Message(ego, ego, a.maneuver, iteration))
            continue
        if not isinstance(a, FactApplies):
            continue
        kind = model.facts[a.fact].kind if a.fact in model.facts else "inferred"
        if kind != "capturing":
            messages.append(Message(ego, ego, a.fact, iteration))
            continue
        first = [s for s in by_conclusion[a] if s.iteration == iteration]
        involved = sorted({p.entity for s in first for p in s.premises if isinstance(p, EntityIn) and p.entity != ego})
        step = _first_step(first)
        own = sorted({p.entity for p in step.premises if isinstance(p, EntityIn) and p.entity != ego})
        if not own:
            continue
        if len(involved) > 1:
            notes.append(f"{a.fact} involves {', '.join(involved)}; sender {own[0]} chosen")
        messages.append(Message(own[0], ego, a.fact, iteration))
    return SequenceDiagram(lifelines, tuple(messages), tuple(notes))


def emit_sequence(model: SpecModel, result: InferenceResult) -> str:
    diagram = sequence_diagram(model, result)
    lines = [f"participant {p}" for p in diagram.lifelines]
    lines += [f"{m.sender} -> {m.receiver} : {m.label}" for m in diagram.messages]
    lines += [f"note : {n}" for n in diagram.notes]
    return "\n".join(lines) + "\n"


# -- result document ----------------------------------------------------------

DOC_KEYS = ("base", "derived", "findings", "scenario", "sources", "steps")


def assertion_to_json(a: GroundAssertion) -> dict:
    if isinstance(a, EntityIn):
        return {"type": "EntityIn", "entity": a.entity, "class": a.cls, "zone": a.zone}
    if isinstance(a, MissionIs):
        return {"type": "MissionIs", "mission": a.mission}
    if isinstance(a, FactApplies):
        return {"type": "FactApplies", "fact": a.fact}
    return {"type": "ManeuverApplies", "maneuver": a.maneuver}


def assertion_from_json(d: Mapping) -> GroundAssertion:
    t = d["type"]
    if t == "EntityIn":
        return EntityIn(d["entity"], d["class"], d["zone"])
    if t == "MissionIs":
        return MissionIs(d["mission"])
    if t == "FactApplies":
        return FactApplies(d["fact"])
    if t == "ManeuverApplies":
        return ManeuverApplies(d["maneuver"])
    raise ValueError(f"unknown assertion type {t!r}")


def _order(result: InferenceResult, items: Iterable[GroundAssertion]) -> list[GroundAssertion]:
    return sorted(items, key=lambda a: (result.first_seen.get(a, 0), assertion_id(a), assertion_key(a)))


def result_document(
    model: SpecModel, result: Optional[InferenceResult], report: Optional[ConsistencyReport] = None
) -> dict:
    if result is None:
        return {k: ([] if k != "scenario" else None) for k in DOC_KEYS}
    sources: set[str] = set()
    for s in result.steps:
        sources.update(model.rules[s.rule].sources)
    for a in result.derived:
        if isinstance(a, FactApplies) and a.fact in model.facts:
            sources.update(model.facts[a.fact].sources)
    steps = sorted(result.steps, key=lambda s: (s.iteration, assertion_id(s.conclusion), s.rule, s.binding))
    return {
        "scenario": result.scenario_id or None,
        "base": [assertion_to_json(a) for a in _order(result, result.base)],
        "derived": [assertion_to_json(a) for a in _order(result, result.derived - result.base)],
        "steps": [
            {
                "iteration": s.iteration,
                "rule": s.rule,
                "binding": dict(s.binding),
                "premises": [assertion_to_json(p) for p in s.premises],
                "conclusion": assertion_to_json(s.conclusion),
            }
            for s in steps
        ],
        "findings": [f.as_dict() for f in (report.findings if report else ())],
        "sources": [
            {
                "id": sid,
                "kind": model.sources[sid].kind,
                "citation": model.sources[sid].citation,
                "excerpt": model.sources[sid].excerpt,
            }
            for sid in sorted(sources)
        ],
    }


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit_result_doc(
    model: SpecModel, result: Optional[InferenceResult], report: Optional[ConsistencyReport] = None
) -> str:
    return _dumps(result_document(model, result, report))


def emit_result_docs(model: SpecModel, results: list[InferenceResult], suite: Optional[SuiteReport] = None) -> str:
    """One document for zero or one scenario, a JSON array of documents otherwise."""
    reports = {r.scenario_id: r for r in suite.reports} if suite else {}
    if len(results) <= 1:
        res = results[0] if results else None
        return emit_result_doc(model, res, reports.get(res.scenario_id) if res else None)
    return _dumps([result_document(model, r, reports.get(r.scenario_id)) for r in results])


def parse_result_doc(text: str) -> tuple[frozenset[GroundAssertion], frozenset[GroundAssertion]]:
    """Read back (base, derived) from a result document; derived includes base."""
    doc = json.loads(text)
    base = frozenset(assertion_from_json(d) for d in doc["base"])
    new = frozenset(assertion_from_json(d) for d in doc["derived"])
    return base, base | new
