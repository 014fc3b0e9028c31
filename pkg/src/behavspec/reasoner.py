"""Forward-chaining inference over positive Horn rules.

Working memory holds ground assertions about one scenario's start scene.
Rules only ever add assertions, so evaluation is monotone and stops once a
pass contributes nothing new. Absence of an assertion means "not derived",
never "false".

Two evaluators are provided. :func:`infer_naive` re-matches every rule
against the whole memory on each pass and serves as the reference.
:func:`infer` is semi-naive: on pass *k* it only considers matches that use
at least one assertion first added on pass *k - 1*. Both record identical
derivation steps.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

from behavspec.diagnostics import UnknownIdentifier
from behavspec.dsl import ast
from behavspec.model import Rule, Scenario, SpecModel


@dataclass(frozen=True)
class EntityIn:
    entity: str
    cls: str
    zone: str


@dataclass(frozen=True)
class FactApplies:
    fact: str


@dataclass(frozen=True)
class ManeuverApplies:
    maneuver: str


@dataclass(frozen=True)
class MissionIs:
    mission: str


GroundAssertion = Union[EntityIn, FactApplies, ManeuverApplies, MissionIs]

_RANK = {EntityIn: 0, MissionIs: 1, FactApplies: 2, ManeuverApplies: 3}


def assertion_key(a: GroundAssertion) -> tuple:
    """Total order over assertions of mixed type."""
    if isinstance(a, EntityIn):
        return (0, a.entity, a.cls, a.zone)
    if isinstance(a, MissionIs):
        return (1, a.mission)
    if isinstance(a, FactApplies):
        return (2, a.fact)
    return (3, a.maneuver)


def assertion_id(a: GroundAssertion) -> str:
    if isinstance(a, EntityIn):
        return a.entity
    if isinstance(a, MissionIs):
        return a.mission
    if isinstance(a, FactApplies):
        return a.fact
    return a.maneuver


def format_assertion(a: GroundAssertion) -> str:
    if isinstance(a, EntityIn):
        return f"{a.cls}({a.entity}) in_zone({a.entity}, {a.zone})"
    if isinstance(a, MissionIs):
        return f"mission_is({a.mission})"
    if isinstance(a, FactApplies):
        return f"applies({a.fact})"
    return f"maneuver({a.maneuver})"


# Binding: variable name -> constant, stored sorted so it can be hashed.
Binding = tuple[tuple[str, str], ...]


def binding_dict(binding: Binding) -> dict[str, str]:
    return dict(binding)


@dataclass(frozen=True)
class WorkingMemory:
    assertions: frozenset[GroundAssertion]
    scenario_id: str = ""
    ego: Optional[str] = None

    def __post_init__(self):
        missions = [a for a in self.assertions if isinstance(a, MissionIs)]
        if len(missions) > 1:
            raise ValueError(f"working memory holds {len(missions)} missions; at most one allowed")


@dataclass(frozen=True)
class DerivationStep:
    conclusion: GroundAssertion
    rule: str
    binding: Binding
    premises: tuple[GroundAssertion, ...]
    iteration: int

    def sort_key(self) -> tuple:
        return (self.iteration, self.rule, self.binding)


@dataclass(frozen=True)
class InferenceResult:
    base: frozenset[GroundAssertion]
    derived: frozenset[GroundAssertion]
    steps: tuple[DerivationStep, ...]
    fired_rules: frozenset[str]
    iterations: int
    scenario_id: str = ""
    ego: Optional[str] = None
    # earliest iteration at which each assertion entered memory (base = 0)
    first_seen: dict = field(default_factory=dict, compare=False, repr=False)

    def steps_for(self, conclusion: GroundAssertion) -> list[DerivationStep]:
        return [s for s in self.steps if s.conclusion == conclusion]


def instantiate_scenario(model: SpecModel, scen: Scenario) -> WorkingMemory:
    """Base assertions of a scenario's start scene."""
    facts: set[GroundAssertion] = set()
    for entity, cls, zone in scen.placements:
        if cls not in model.classes:
            raise UnknownIdentifier(cls)
        if zone not in model.zones:
            raise UnknownIdentifier(zone)
        facts.add(EntityIn(entity, cls, zone))
    if scen.mission is not None:
        if scen.mission not in model.missions:
            raise UnknownIdentifier(scen.mission)
        facts.add(MissionIs(scen.mission))
    for f in scen.asserts:
        if f not in model.facts:
            raise UnknownIdentifier(f)
        facts.add(FactApplies(f))
    return WorkingMemory(frozenset(facts), scen.id, scen.ego)


# -- matching -----------------------------------------------------------------


class _Index:
    """Lookup structures over a set of assertions."""

    def __init__(self, model: SpecModel, assertions: Iterable[GroundAssertion], subclass_match: bool):
        self.by_class: dict[str, list[EntityIn]] = defaultdict(list)
        self.entity_in: list[EntityIn] = []
        self.facts: set[FactApplies] = set()
        self.missions: set[MissionIs] = set()
        self.zones = model.zones
        for a in assertions:
            if isinstance(a, EntityIn):
                self.entity_in.append(a)
                if subclass_match:
                    for sup in model.ancestors.get(a.cls, (a.cls,)):
                        self.by_class[sup].append(a)
                else:
                    self.by_class[a.cls].append(a)
            elif isinstance(a, FactApplies):
                self.facts.add(a)
            elif isinstance(a, MissionIs):
                self.missions.add(a)


def _unify(term: ast.Term, value: str, env: dict[str, str]) -> Optional[dict[str, str]]:
    if isinstance(term, ast.Var):
        bound = env.get(term.name)
        if bound is None:
            new = dict(env)
            new[term.name] = value
            return new
        return env if bound == value else None
    return env if term == value else None


def _is_static(atom: ast.Atom) -> bool:
    """Static atoms are decided by the model alone and contribute no premise."""
    return isinstance(atom, ast.ZoneAtom)


def _atom_matches(
    atom: ast.Atom, idx: _Index, env: dict[str, str]
) -> Iterator[tuple[dict[str, str], Optional[GroundAssertion]]]:
    if isinstance(atom, ast.ZoneAtom):
        if atom.zone in idx.zones:
            e = _unify(atom.term, atom.zone, env)
            if e is not None:
                yield e, None
    elif isinstance(atom, ast.ClassAtom):
        for a in idx.by_class.get(atom.cls, ()):
            e = _unify(atom.term, a.entity, env)
            if e is not None:
                yield e, a
    elif isinstance(atom, ast.InZoneAtom):
        for a in idx.entity_in:
            e = _unify(atom.entity, a.entity, env)
            if e is not None:
                e = _unify(atom.zone, a.zone, e)
                if e is not None:
                    yield e, a
    elif isinstance(atom, ast.AppliesAtom):
        a = FactApplies(atom.fact)
        if a in idx.facts:
            yield env, a
    else:
        a = MissionIs(atom.mission)
        if a in idx.missions:
            yield env, a


def _join(body: Sequence[ast.Atom], pools: Sequence[_Index]) -> Iterator[tuple[dict[str, str], list[GroundAssertion]]]:
    """Backtracking join; atom i draws its premise from pools[i]."""

    def go(i: int, env: dict[str, str], premises: list[GroundAssertion]):
        if i == len(body):
            yield env, premises
            return
        for e, a in _atom_matches(body[i], pools[i], env):
            yield from go(i + 1, e, premises + [a])

    yield from go(0, {}, [])


def _finish(env: dict[str, str], premises: list[GroundAssertion]) -> tuple[Binding, tuple[GroundAssertion, ...]]:
    uniq: list[GroundAssertion] = []
    for p in premises:
        if p is not None and p not in uniq:
            uniq.append(p)
    return tuple(sorted(env.items())), tuple(uniq)


def match_rule(
    model: SpecModel, wm: WorkingMemory | Iterable[GroundAssertion], rule: Rule, *, subclass_match: bool = True
) -> list[tuple[Binding, tuple[GroundAssertion, ...]]]:
    """All (binding, premises) pairs satisfying the rule body, in sorted order."""
    assertions = wm.assertions if isinstance(wm, WorkingMemory) else wm
    idx = _Index(model, assertions, subclass_match)
    found = {_finish(env, prem) for env, prem in _join(rule.body, [idx] * len(rule.body))}
    return sorted(found, key=lambda bp: (bp[0], [assertion_key(p) for p in bp[1]]))


def head_assertion(rule: Rule) -> GroundAssertion:
    if isinstance(rule.head, ast.FactHead):
        return FactApplies(rule.head.fact)
    return ManeuverApplies(rule.head.maneuver)


def _premise_key(premises: tuple[GroundAssertion, ...]) -> list:
    return [assertion_key(p) for p in premises]


def _select(
    candidates: dict[tuple[str, Binding], tuple[GroundAssertion, ...]],
    rule: Rule,
    env: dict[str, str],
    premises: list[GroundAssertion],
) -> None:
    binding, prem = _finish(env, premises)
    key = (rule.id, binding)
    old = candidates.get(key)
    if old is None or _premise_key(prem) < _premise_key(old):
        candidates[key] = prem


def _resolve_rules(model: SpecModel, rules: Optional[Iterable[Rule]]) -> list[Rule]:
    rs = model.sorted_rules() if rules is None else list(rules)
    return sorted(rs, key=lambda r: r.id)


def _build_result(
    wm: WorkingMemory,
    memory: set[GroundAssertion],
    steps: list[DerivationStep],
    first_seen: dict[GroundAssertion, int],
) -> InferenceResult:
    steps.sort(key=DerivationStep.sort_key)
    return InferenceResult(
        base=wm.assertions,
        derived=frozenset(memory),
        steps=tuple(steps),
        fired_rules=frozenset(s.rule for s in steps),
        iterations=max((s.iteration for s in steps), default=0),
        scenario_id=wm.scenario_id,
        ego=wm.ego,
        first_seen=dict(first_seen),
    )


def _apply_pass(
    candidates: dict[tuple[str, Binding], tuple[GroundAssertion, ...]],
    rule_by_id: dict[str, Rule],
    seen: set[tuple[str, Binding]],
    memory: set[GroundAssertion],
    first_seen: dict[GroundAssertion, int],
    steps: list[DerivationStep],
    iteration: int,
) -> set[GroundAssertion]:
    delta: set[GroundAssertion] = set()
    for (rid, binding), premises in candidates.items():
        if (rid, binding) in seen:
            continue
        seen.add((rid, binding))
        conclusion = head_assertion(rule_by_id[rid])
        steps.append(DerivationStep(conclusion, rid, binding, premises, iteration))
        if conclusion not in memory:
            delta.add(conclusion)
    for a in delta:
        memory.add(a)
        first_seen[a] = iteration
    return delta


def infer_naive(
    model: SpecModel,
    wm: WorkingMemory,
    rules: Optional[Iterable[Rule]] = None,
    *,
    subclass_match: bool = True,
) -> InferenceResult:
    """Least fixpoint by repeated full passes over every rule."""
    rule_list = _resolve_rules(model, rules)
    rule_by_id = {r.id: r for r in rule_list}
    memory = set(wm.assertions)
    first_seen = {a: 0 for a in memory}
    seen: set[tuple[str, Binding]] = set()
    steps: list[DerivationStep] = []
    iteration = 0
    while True:
        iteration += 1
        idx = _Index(model, memory, subclass_match)
        candidates: dict[tuple[str, Binding], tuple[GroundAssertion, ...]] = {}
        for rule in rule_list:
            for env, premises in _join(rule.body, [idx] * len(rule.body)):
                _select(candidates, rule, env, premises)
        delta = _apply_pass(candidates, rule_by_id, seen, memory, first_seen, steps, iteration)
        if not delta:
            return _build_result(wm, memory, steps, first_seen)


def infer(
    model: SpecModel,
    wm: WorkingMemory,
    rules: Optional[Iterable[Rule]] = None,
    *,
    subclass_match: bool = True,
) -> InferenceResult:
    """Semi-naive least fixpoint; same derived set and steps as :func:`infer_naive`."""
    rule_list = _resolve_rules(model, rules)
    rule_by_id = {r.id: r for r in rule_list}
    memory = set(wm.assertions)
    first_seen = {a: 0 for a in memory}
    seen: set[tuple[str, Binding]] = set()
    steps: list[DerivationStep] = []
    delta = set(memory)
    iteration = 0
    # the first pass always runs so rules with only static atoms can fire
    while delta or iteration == 0:
        iteration += 1
        old = memory - delta
        full_idx = _Index(model, memory, subclass_match)
        old_idx = _Index(model, old, subclass_match)
        delta_idx = _Index(model, delta, subclass_match)
        candidates: dict[tuple[str, Binding], tuple[GroundAssertion, ...]] = {}
        for rule in rule_list:
            dynamic = [j for j, atom in enumerate(rule.body) if not _is_static(atom)]
            if not dynamic:
                if iteration == 1:
                    for env, premises in _join(rule.body, [full_idx] * len(rule.body)):
                        _select(candidates, rule, env, premises)
                continue
            # dynamic atom k from delta, earlier ones from old, later ones from
            # full memory: a disjoint cover of all matches touching delta
            for k, i in enumerate(dynamic):
                pools = [full_idx] * len(rule.body)
                for j in dynamic[:k]:
                    pools[j] = old_idx
                pools[i] = delta_idx
                for env, premises in _join(rule.body, pools):
                    _select(candidates, rule, env, premises)
        delta = _apply_pass(candidates, rule_by_id, seen, memory, first_seen, steps, iteration)
    return _build_result(wm, memory, steps, first_seen)


def applicable_maneuvers(result: InferenceResult) -> frozenset[str]:
    return frozenset(a.maneuver for a in result.derived if isinstance(a, ManeuverApplies))


def derived_facts(result: InferenceResult) -> frozenset[str]:
    return frozenset(a.fact for a in result.derived if isinstance(a, FactApplies))


def replay_step(model: SpecModel, step: DerivationStep, rule: Optional[Rule] = None, *, subclass_match: bool = True) -> bool:
    """Re-apply a step's rule under its binding to its premises alone."""
    rule = rule or model.rules[step.rule]
    for binding, premises in match_rule(model, step.premises, rule, subclass_match=subclass_match):
        if binding == step.binding and head_assertion(rule) == step.conclusion:
            return True
    return False


def evaluate_scenario(
    model: SpecModel, scen: Scenario, rules: Optional[Iterable[Rule]] = None, *, subclass_match: bool = True
) -> InferenceResult:
    return infer(model, instantiate_scenario(model, scen), rules, subclass_match=subclass_match)
