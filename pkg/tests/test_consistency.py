from hypothesis import given, settings
from hypothesis import strategies as st

from behavspec import corpus
from behavspec.consistency import (
    CONSISTENT,
    INCONSISTENT,
    FINDING_KINDS,
    ConsistencyReport,
    Finding,
    check_scenario,
    check_suite,
)
from behavspec.model import Scenario
from behavspec.reasoner import InferenceResult, ManeuverApplies, evaluate_scenario

from conftest import corpus_run, load_model, load_scenario

MANEUVERS = ["KeepLane_FollowDesiredSpeed", "KeepLane_Stop"]


def scenarios(model, *names):
    return [load_scenario(model, corpus.read(n), n) for n in names]


def kinds(report):
    return [f.kind for f in report.findings]


def test_scenario_b_v1_mismatch():
    model, scen, result = corpus_run(corpus.SPEC_V1, "B.nscen")
    report = check_scenario(model, result, scen, usage_warnings=False)
    assert report.verdict == INCONSISTENT
    (finding,) = report.findings
    assert finding.kind == "ExpectationMismatch" and finding.severity == "error"
    assert finding.details == {"expected": ["KeepLane_Stop"], "derived": ["KeepLane_FollowDesiredSpeed"]}


def test_no_mission_no_maneuver_is_fine(v1):
    scen = Scenario("Quiet")
    result = evaluate_scenario(v1, scen)
    assert check_scenario(v1, result, scen, usage_warnings=False).findings == ()


def test_mission_without_maneuver_is_an_error(v1):
    scen = load_scenario(v1, "scenario Lonely { ego car : CarWithAgent mission FollowRoad in EgoFront1Straight }")
    report = check_scenario(v1, evaluate_scenario(v1, scen), scen, usage_warnings=False)
    assert kinds(report) == ["NoManeuverInferred"]
    assert report.findings[0].details == {"mission": "FollowRoad"}


def test_conflicting_maneuvers(dup_head):
    model, scen, result = dup_head
    report = check_scenario(model, result, scen, usage_warnings=False)
    assert kinds(report) == ["ConflictingManeuvers", "ExpectationMismatch"]
    assert report.findings[0].details == {"group": "StopOrGo", "maneuvers": ["KeepLane_Go", "KeepLane_Stop"]}


def test_usage_warnings_in_single_scenario():
    model, scen, result = corpus_run(corpus.SPEC_V1, "A.nscen")
    report = check_scenario(model, result, scen)
    assert report.verdict == CONSISTENT
    never_fired = {f.details["rule"] for f in report.findings if f.kind == "RuleNeverFired"}
    assert never_fired == {"ProceedCrossingClear", "ProceedPedestrianAwayFromCrossing"}
    never_derived = {f.details["fact"] for f in report.findings if f.kind == "FactNeverDerived"}
    assert never_derived == {"PedestrianCrossingClear"}


def test_suite_v1_is_inconsistent(v1):
    suite = check_suite(v1, scenarios(v1, "A.nscen", "B.nscen"))
    assert suite.verdict == INCONSISTENT
    assert [r.verdict for r in suite.reports] == [CONSISTENT, INCONSISTENT]


def test_suite_v2_is_consistent(v2):
    suite = check_suite(v2, scenarios(v2, "A.nscen", "B.nscen"))
    assert suite.verdict == CONSISTENT
    assert {f.details["rule"] for f in suite.findings if f.kind == "RuleNeverFired"} == {"ProceedCrossingClear"}
    assert all(f.details["scope"] == "all" for f in suite.findings)


def test_suite_over_all_corpus_scenarios_fires_every_rule(v1):
    suite = check_suite(v1, scenarios(v1, *corpus.SCENARIOS))
    assert not [f for f in suite.findings if f.kind == "RuleNeverFired"]


def test_empty_suite(v1):
    suite = check_suite(v1, [])
    assert suite.reports == () and suite.findings == () and suite.verdict == CONSISTENT


def test_check_scenario_is_deterministic(v1):
    model, scen, result = corpus_run(corpus.SPEC_V1, "B.nscen")
    assert check_scenario(model, result, scen) == check_scenario(model, result, scen)
    order = [FINDING_KINDS.index(k) for k in kinds(check_scenario(model, result, scen))]
    assert order == sorted(order)


@settings(max_examples=200, deadline=None)
@given(st.frozensets(st.sampled_from(MANEUVERS)), st.one_of(st.none(), st.frozensets(st.sampled_from(MANEUVERS))))
def test_expectation_mismatch_iff_sets_differ(derived, expect):
    model = load_model(
        "maneuver KeepLane_Stop lateral = keep_lane longitudinal = stop\n"
        "maneuver KeepLane_FollowDesiredSpeed lateral = keep_lane longitudinal = follow_desired_speed\n"
    )
    facts = frozenset(ManeuverApplies(m) for m in derived)
    result = InferenceResult(frozenset(), facts, (), frozenset(), 0)
    report = check_scenario(model, result, Scenario("S", expect=expect), usage_warnings=False)
    mismatch = "ExpectationMismatch" in kinds(report)
    assert mismatch == (expect is not None and expect != derived)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["RuleNeverFired", "FactNeverDerived"]), max_size=6))
def test_warnings_never_flip_verdict(extra):
    findings = tuple(Finding("warning", k, {"rule": "R"}) for k in extra)
    assert ConsistencyReport("S", findings).verdict == CONSISTENT
