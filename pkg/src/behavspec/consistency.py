"""Post-inference checks on scenario outcomes.

A positive Horn rule set can never become unsatisfiable, so consistency is
checked through outcome findings instead: conflicting maneuver options, a
mission with no maneuver option, a mismatch with the scenario's expected
maneuvers, and rules or facts that never play a part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from behavspec.diagnostics import ERROR, WARNING
from behavspec.model import Rule, Scenario, SpecModel
from behavspec.reasoner import InferenceResult, applicable_maneuvers, derived_facts, evaluate_scenario

FINDING_KINDS = (
    "ConflictingManeuvers",
    "NoManeuverInferred",
    "ExpectationMismatch",
    "RuleNeverFired",
    "FactNeverDerived",
)
_KIND_ORDER = {k: i for i, k in enumerate(FINDING_KINDS)}

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class Finding:
    severity: str
    kind: str
    details: Mapping[str, object] = field(default_factory=dict)

    def sort_key(self):
        return (_KIND_ORDER[self.kind], _flatten(self.details))

    def as_dict(self) -> dict:
        return {"severity": self.severity, "kind": self.kind, "details": dict(self.details)}

    def __str__(self) -> str:
        parts = []
        for k in sorted(self.details):
            v = self.details[k]
            parts.append(f"{k}={{{', '.join(v)}}}" if isinstance(v, (list, tuple)) else f"{k}={v}")
        return f"{self.severity}[{self.kind}] " + " ".join(parts)


def _flatten(details: Mapping[str, object]) -> tuple:
    out = []
    for k in sorted(details):
        v = details[k]
        out.append((k, tuple(v) if isinstance(v, (list, tuple)) else (str(v),)))
    return tuple(out)


def _verdict(findings: Iterable[Finding]) -> str:
    return INCONSISTENT if any(f.severity == ERROR for f in findings) else CONSISTENT


@dataclass(frozen=True)
class ConsistencyReport:
    scenario_id: str
    findings: tuple[Finding, ...]
    derived_maneuvers: frozenset[str] = frozenset()

    @property
    def verdict(self) -> str:
        return _verdict(self.findings)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == ERROR]


@dataclass(frozen=True)
class SuiteReport:
    reports: tuple[ConsistencyReport, ...]
    findings: tuple[Finding, ...]  # cross-scenario warnings
    results: Mapping[str, InferenceResult] = field(default_factory=dict, compare=False, repr=False)

    @property
    def verdict(self) -> str:
        all_findings = list(self.findings)
        for r in self.reports:
            all_findings.extend(r.findings)
        return _verdict(all_findings)


def _sorted(findings: Iterable[Finding]) -> tuple[Finding, ...]:
    return tuple(sorted(findings, key=Finding.sort_key))


def _unused_findings(model: SpecModel, fired: set[str], derived: set[str], scope: str) -> list[Finding]:
    out = []
    for rid in sorted(set(model.rules) - fired):
        out.append(Finding(WARNING, "RuleNeverFired", {"rule": rid, "scope": scope}))
    for fid, fact in sorted(model.facts.items()):
        if fact.kind == "maneuver_fact" or fid in derived or "FactNeverDerived" in fact.allow:
            continue
        if fact.kind == "inferred" and "UnderivableFact" in fact.allow:
            continue
        out.append(Finding(WARNING, "FactNeverDerived", {"fact": fid, "scope": scope}))
    return out


def check_scenario(
    model: SpecModel, result: InferenceResult, scen: Scenario, *, usage_warnings: bool = True
) -> ConsistencyReport:
    """Outcome findings for one scenario, ordered by kind then ids."""
    findings: list[Finding] = []
    maneuvers = applicable_maneuvers(result)
    for gid, group in sorted(model.conflict_groups.items()):
        clash = sorted(group.members & maneuvers)
        if len(clash) >= 2:
            findings.append(Finding(ERROR, "ConflictingManeuvers", {"group": gid, "maneuvers": clash}))
    if scen.mission is not None and not maneuvers:
        findings.append(Finding(ERROR, "NoManeuverInferred", {"mission": scen.mission}))
    if scen.expect is not None and scen.expect != maneuvers:
        findings.append(
            Finding(
                ERROR,
                "ExpectationMismatch",
                {"expected": sorted(scen.expect), "derived": sorted(maneuvers)},
            )
        )
    if usage_warnings:
        findings.extend(_unused_findings(model, set(result.fired_rules), set(derived_facts(result)), scen.id))
    return ConsistencyReport(scen.id, _sorted(findings), maneuvers)


def check_suite(
    model: SpecModel,
    scenarios: Sequence[Scenario],
    rules: Optional[Iterable[Rule]] = None,
    *,
    subclass_match: bool = True,
) -> SuiteReport:
    """Check every scenario and add warnings for rules and facts unused across all of them."""
    rule_list = None if rules is None else list(rules)
    reports = []
    results = {}
    fired: set[str] = set()
    derived: set[str] = set()
    for scen in scenarios:
        result = evaluate_scenario(model, scen, rule_list, subclass_match=subclass_match)
        results[scen.id] = result
        reports.append(check_scenario(model, result, scen, usage_warnings=False))
        fired |= result.fired_rules
        derived |= derived_facts(result)
    cross: list[Finding] = []
    if scenarios:
        cross = _unused_findings(model, fired, derived, "all")
    return SuiteReport(tuple(reports), _sorted(cross), results)
