"""Walk through the pedestrian-crossing corpus.

Ruleset v1 handles a pedestrian standing at the crossing but misses one who
waits further along the sidewalk. Ruleset v2 drops the location constraint
and both scenes end in a stop.

    python3 demos/pedestrian_crossing.py
"""

from behavspec import corpus
from behavspec.consistency import check_suite
from behavspec.dsl import parse_scenario_text, parse_text
from behavspec.export import build_cbg, emit_dot, emit_sequence
from behavspec.model import resolve, resolve_scenario
from behavspec.reasoner import applicable_maneuvers, derived_facts
from behavspec.trace import render_report, trace_report


def load(spec_name):
    decls, diags = parse_text(corpus.read(spec_name), spec_name)
    assert not diags
    model = resolve(decls)
    scenarios = []
    for name in ("A.nscen", "B.nscen"):
        decl, diags = parse_scenario_text(corpus.read(name), name)
        assert not diags
        scenarios.append(resolve_scenario(model, decl))
    return model, scenarios


def run(spec_name):
    model, scenarios = load(spec_name)
    suite = check_suite(model, scenarios)
    print(f"== {spec_name}")
    for scen in scenarios:
        result = suite.results[scen.id]
        print(f"{scen.id}: maneuvers {sorted(applicable_maneuvers(result))}")
        print(f"    facts {sorted(derived_facts(result))}")
    for report in suite.reports:
        for finding in report.findings:
            print(f"    {report.scenario_id}: {finding}")
    print(f"verdict: {suite.verdict}\n")
    return model, suite


model, suite = run(corpus.SPEC_V1)

# why does the car stop in scenario A, and which documents say so
result_a = suite.results["ScenarioA"]
print(render_report(model, trace_report(model, result_a, "KeepLane_Stop")))

print("sequence view of scenario A:")
print(emit_sequence(model, result_a))

print("causal behavior graph of scenario A (graphviz):")
print(emit_dot(build_cbg(model, result_a, include_entities=False)))

# the adapted ruleset closes the gap found in scenario B
model2, suite2 = run(corpus.SPEC_V2)
assert suite2.verdict == "consistent"
