import json

import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from behavspec import corpus
from behavspec.consistency import check_scenario
from behavspec.diagnostics import NoEgo
from behavspec.export import (
    DOC_KEYS,
    CausalBehaviorGraph,
    Edge,
    Node,
    build_cbg,
    emit_dot,
    emit_result_doc,
    emit_result_docs,
    emit_sequence,
    parse_result_doc,
    sequence_diagram,
    union,
    validate_cbg,
)
from behavspec.model import Scenario
from behavspec.reasoner import WorkingMemory, evaluate_scenario, infer
from behavspec.testing import random_instance

from conftest import GOLDEN, corpus_run, load_model, load_scenario


def message_tuples(model, result):
    return [(m.sender, m.receiver, m.label) for m in sequence_diagram(model, result).messages]


# -- Causal Behavior Graph ------------------------------------------------------


def test_scenario_a_graph_has_stop_as_unique_sink():
    model, _, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    graph = build_cbg(model, result)
    assert graph.sinks() == {"maneuver:KeepLane_Stop"}
    assert validate_cbg(model, graph, [result]) == []
    assert graph.nodes["fact:ValidPedestrianCrossing"].kind == "fact"
    assert graph.nodes["entity:s293@EgoFront2Straight"].kind == "entity"


def test_entities_can_be_suppressed():
    model, _, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    graph = build_cbg(model, result, include_entities=False)
    assert {n.kind for n in graph.nodes.values()} == {"fact", "maneuver"}
    assert graph.sinks() == {"maneuver:KeepLane_Stop"}


def test_graph_without_rules_is_isolated_base_nodes(v1):
    scen = load_scenario(v1, corpus.read("A.nscen"))
    result = evaluate_scenario(v1, scen, rules=[])
    graph = build_cbg(v1, result)
    assert graph.edges == frozenset()
    assert len(graph.nodes) == len(result.base) == 5


def test_union_under_v2_shares_valid_crossing(v2):
    results = [evaluate_scenario(v2, load_scenario(v2, corpus.read(n))) for n in ("A.nscen", "B.nscen")]
    graphs = [build_cbg(v2, r) for r in results]
    for g in graphs:
        assert "fact:ValidPedestrianCrossing" in g.nodes
    merged = union(graphs)
    assert merged.sinks() == {"maneuver:KeepLane_Stop"}
    assert validate_cbg(v2, merged, results) == []


def test_validate_flags_bad_graphs(v1):
    _, _, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    nodes = {
        "maneuver:M": Node("maneuver:M", "M", "maneuver"),
        "fact:F": Node("fact:F", "F", "fact"),
    }
    edges = frozenset({Edge("maneuver:M", "fact:F", "NoSuchRule"), Edge("fact:F", "maneuver:M", "Rule4")})
    bad = CausalBehaviorGraph(nodes, edges)
    problems = validate_cbg(v1, bad, [result])
    assert any(p.startswith("cycle") for p in problems)
    assert any("unknown rule NoSuchRule" in p for p in problems)
    assert any("outgoing edge" in p for p in problems)
    assert any("matches no derivation step" in p for p in problems)


def test_rederivation_does_not_close_a_cycle():
    model = load_model(
        "class Thing : L4_MovableObject\nzone Z\nfact F kind = capturing\nfact G kind = inferred\n"
        "rule R1: Thing(?x) => applies(F)\nrule R2: applies(F) => applies(G)\nrule R3: applies(G) => applies(F)"
    )
    result = evaluate_scenario(model, Scenario("S", frozenset({("t", "Thing", "Z")})))
    assert "R3" in {s.rule for s in result.steps}
    graph = build_cbg(model, result)
    assert {e.rule for e in graph.edges} == {"R1", "R2"}
    assert validate_cbg(model, graph, [result]) == []


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_graphs_are_valid(seed):
    inst = random_instance(seed)
    result = infer(inst.model, inst.wm)
    graph = build_cbg(inst.model, result)
    assert validate_cbg(inst.model, graph, [result]) == []
    for nid, node in graph.nodes.items():
        if node.kind == "maneuver":
            assert not any(e.src == nid for e in graph.edges)


# -- DOT -----------------------------------------------------------------------


def test_one_node_graph():
    graph = CausalBehaviorGraph({"fact:F": Node("fact:F", "F", "fact")}, frozenset())
    text = emit_dot(graph)
    node_lines = [line for line in text.splitlines() if "[label=" in line]
    assert node_lines == ['  "fact:F" [label="F", shape=ellipse];']


def test_scenario_a_dot_golden():
    model, _, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    assert emit_dot(build_cbg(model, result)) == (GOLDEN / "scenario_a_v1.dot").read_text()


def test_dot_parses_with_pydot():
    model, _, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    graph = build_cbg(model, result)
    (parsed,) = pydot.graph_from_dot_data(emit_dot(graph))
    names = {n.get_name().strip('"') for n in parsed.get_nodes()} - {"node", "graph", "edge"}
    assert names == set(graph.nodes)
    edges = {
        (e.get_source().strip('"'), e.get_destination().strip('"'), e.get("label").strip('"'))
        for e in parsed.get_edges()
    }
    assert edges == {(e.src, e.dst, e.rule) for e in graph.edges}
    shapes = {n.get_name().strip('"'): n.get("shape") for n in parsed.get_nodes()}
    assert shapes["maneuver:KeepLane_Stop"] == "box"
    assert shapes["fact:Sign293_captured"] == "ellipse"
    assert shapes["entity:ped1@SidewalkRightOfCrossing"] == "plaintext"


def test_dot_quoting():
    graph = CausalBehaviorGraph({'fact:a"b': Node('fact:a"b', 'say "hi"\\', "fact")}, frozenset())
    (parsed,) = pydot.graph_from_dot_data(emit_dot(graph))
    assert len([n for n in parsed.get_nodes() if n.get_name() not in ("node", "graph", "edge")]) == 1


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.randoms(use_true_random=False))
def test_emitters_ignore_input_order(seed, rnd):
    inst = random_instance(seed)
    rules = list(inst.model.rules.values())
    rnd.shuffle(rules)
    base = list(inst.wm.assertions)
    rnd.shuffle(base)
    a = infer(inst.model, inst.wm)
    b = infer(inst.model, WorkingMemory(frozenset(base), inst.wm.scenario_id, inst.wm.ego), rules)
    assert emit_dot(build_cbg(inst.model, a)) == emit_dot(build_cbg(inst.model, b))
    assert emit_result_doc(inst.model, a) == emit_result_doc(inst.model, b)
    if inst.wm.ego is not None:
        assert emit_sequence(inst.model, a) == emit_sequence(inst.model, b)


# -- sequence text ---------------------------------------------------------------


def test_scenario_a_sequence():
    model, _, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    assert message_tuples(model, result) == [
        ("s293", "ego", "Sign293_captured"),
        ("s350", "ego", "Sign350_captured"),
        ("ped1", "ego", "PedestrianNearPedestrianCrossing"),
        ("ego", "ego", "ValidPedestrianCrossing"),
        ("ego", "ego", "PedestrianCrossingIntention"),
        ("ego", "ego", "KeepLane_Stop"),
    ]
    assert emit_sequence(model, result) == (GOLDEN / "scenario_a_v1.seq").read_text()


def test_ego_only_without_rules(v1):
    scen = load_scenario(v1, "scenario Solo { ego car : CarWithAgent mission FollowRoad in EgoZone }")
    result = evaluate_scenario(v1, scen, rules=[])
    diagram = sequence_diagram(v1, result)
    assert diagram.lifelines == ("car",) and diagram.messages == ()
    assert emit_sequence(v1, result) == "participant car\n"


def test_no_ego(v1):
    result = evaluate_scenario(v1, Scenario("NoEgo"))
    with pytest.raises(NoEgo):
        emit_sequence(v1, result)


def test_v1_v2_scenario_b_diverge_after_valid_crossing():
    m1, _, r1 = corpus_run(corpus.SPEC_V1, "B.nscen")
    m2, _, r2 = corpus_run(corpus.SPEC_V2, "B.nscen")
    s1, s2 = message_tuples(m1, r1), message_tuples(m2, r2)
    shared = 0
    while shared < min(len(s1), len(s2)) and s1[shared] == s2[shared]:
        shared += 1
    assert s1[shared - 1] == ("ego", "ego", "ValidPedestrianCrossing")
    assert s1[shared:] == [("ego", "ego", "KeepLane_FollowDesiredSpeed")]
    assert s2[shared:] == [("ego", "ego", "PedestrianCrossingIntention"), ("ego", "ego", "KeepLane_Stop")]


def test_salient_entity_note():
    model = load_model(
        "class Walker : L4_MovableObject\nclass Car : L4_MovableObject\nzone Z\n"
        "fact Crowd kind = capturing\nrule R: Walker(?a), Walker(?b), in_zone(?a, Z), in_zone(?b, Z) => applies(Crowd)"
    )
    scen = Scenario("S", frozenset({("me", "Car", "Z"), ("w1", "Walker", "Z"), ("w2", "Walker", "Z")}), ego="me")
    result = evaluate_scenario(model, scen)
    diagram = sequence_diagram(model, result)
    assert [(m.sender, m.label) for m in diagram.messages] == [("w1", "Crowd")]
    assert diagram.notes == ("Crowd involves w1, w2; sender w1 chosen",)


# -- result document -----------------------------------------------------------------


def test_empty_document(v1):
    doc = json.loads(emit_result_doc(v1, None))
    assert tuple(doc) == DOC_KEYS
    assert doc == {"scenario": None, "base": [], "derived": [], "steps": [], "findings": [], "sources": []}
    assert json.loads(emit_result_docs(v1, [])) == doc


def test_scenario_a_document():
    model, scen, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    text = emit_result_doc(model, result, check_scenario(model, result, scen, usage_warnings=False))
    doc = json.loads(text)
    assert set(doc) == {"scenario", "base", "derived", "steps", "findings", "sources"}
    kinds = [d["type"] for d in doc["derived"]]
    assert kinds.count("FactApplies") == 6 and kinds.count("ManeuverApplies") == 1
    assert doc["derived"][-1] == {"type": "ManeuverApplies", "maneuver": "KeepLane_Stop"}
    assert [s["iteration"] for s in doc["steps"]] == sorted(s["iteration"] for s in doc["steps"])
    assert text == (GOLDEN / "scenario_a_v1.json").read_text()


def test_document_keys_are_sorted_everywhere():
    model, _, result = corpus_run(corpus.SPEC_V1, "B.nscen")
    text = emit_result_doc(model, result)

    def walk(obj):
        if isinstance(obj, dict):
            assert list(obj) == sorted(obj)
            for v in obj.values():
                walk(v)
        elif isinstance(obj, list):
            for v in obj:
                walk(v)

    walk(json.loads(text))


@pytest.mark.parametrize("spec", [corpus.SPEC_V1, corpus.SPEC_V2])
@pytest.mark.parametrize("scen", corpus.SCENARIOS)
def test_document_round_trip(spec, scen):
    model, _, result = corpus_run(spec, scen)
    base, derived = parse_result_doc(emit_result_doc(model, result))
    assert base == result.base and derived == result.derived


def test_multiple_scenarios_give_an_array(v1):
    results = [evaluate_scenario(v1, load_scenario(v1, corpus.read(n))) for n in ("A.nscen", "B.nscen")]
    docs = json.loads(emit_result_docs(v1, results))
    assert [d["scenario"] for d in docs] == ["ScenarioA", "ScenarioB"]


def test_random_documents_round_trip():
    for seed in range(40):
        inst = random_instance(seed)
        result = infer(inst.model, inst.wm)
        base, derived = parse_result_doc(emit_result_doc(inst.model, result))
        assert (base, derived) == (result.base, result.derived)
