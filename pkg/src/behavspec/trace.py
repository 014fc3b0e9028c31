"""Derivation trees and knowledge-source traceability."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from behavspec.diagnostics import TargetNotDerived
from behavspec.model import SpecModel
from behavspec.reasoner import (
    Binding,
    DerivationStep,
    FactApplies,
    GroundAssertion,
    InferenceResult,
    ManeuverApplies,
    format_assertion,
)


@dataclass(frozen=True)
class Leaf:
    root: GroundAssertion


@dataclass(frozen=True)
class DerivationTree:
    root: GroundAssertion
    rule: str
    binding: Binding
    children: tuple[Union["DerivationTree", Leaf], ...]


Tree = Union[DerivationTree, Leaf]


def tree_depth(tree: Tree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max((tree_depth(c) for c in tree.children), default=0)


def tree_leaves(tree: Tree) -> list[GroundAssertion]:
    if isinstance(tree, Leaf):
        return [tree.root]
    return [leaf for c in tree.children for leaf in tree_leaves(c)]


def tree_rules(tree: Tree) -> set[str]:
    if isinstance(tree, Leaf):
        return set()
    out = {tree.rule}
    for c in tree.children:
        out |= tree_rules(c)
    return out


def tree_assertions(tree: Tree) -> set[GroundAssertion]:
    out = {tree.root}
    if isinstance(tree, DerivationTree):
        for c in tree.children:
            out |= tree_assertions(c)
    return out


class _TreeBuilder:
    def __init__(self, result: InferenceResult):
        self.result = result
        self.by_conclusion: dict[GroundAssertion, list[DerivationStep]] = {}
        for s in result.steps:
            self.by_conclusion.setdefault(s.conclusion, []).append(s)
        for steps in self.by_conclusion.values():
            steps.sort(key=lambda s: (s.rule, s.binding))

    def trees(self, target: GroundAssertion, before: Optional[int], path: frozenset) -> Iterator[Tree]:
        """Trees for ``target`` built only from steps with iteration < ``before``."""
        if target in self.result.base:
            yield Leaf(target)
            return
        if target in path:
            # a later re-derivation leaning on an earlier one; the tree via the
            # earlier derivation alone is always enumerated as well
            return
        path = path | {target}
        for step in self.by_conclusion.get(target, ()):
            if before is not None and step.iteration >= before:
                continue
            # premises precede their conclusion, so recursion depth is bounded
            assert all(self.result.first_seen.get(p, 0) < step.iteration for p in step.premises)
            child_iters = [lambda p=p, it=step.iteration: self.trees(p, it, path) for p in step.premises]
            for combo in _product(child_iters):
                yield DerivationTree(target, step.rule, step.binding, tuple(combo))


def _product(factories) -> Iterator[tuple]:
    """Lazy cartesian product over re-creatable iterators."""
    if not factories:
        yield ()
        return
    first, rest = factories[0], factories[1:]
    for head in first():
        for tail in _product(rest):
            yield (head,) + tail


def derivation_trees(result: InferenceResult, target: GroundAssertion, max_trees: int = 1) -> list[Tree]:
    """Up to ``max_trees`` distinct derivation trees, ordered by (rule id, binding)."""
    if target not in result.derived:
        raise TargetNotDerived(format_assertion(target))
    builder = _TreeBuilder(result)
    return list(itertools.islice(builder.trees(target, None, frozenset()), max_trees))


@dataclass(frozen=True)
class TraceReport:
    target: str
    trees: tuple[Tree, ...]
    sources: frozenset[str]
    assumptions: frozenset[str]
    analyses: frozenset[str]
    rules: frozenset[str]
    facts: frozenset[str]
    warnings: tuple[str, ...] = ()


def trace_report(model: SpecModel, result: InferenceResult, maneuver_id: str, max_trees: int = 16) -> TraceReport:
    """Sources, assumptions and analyses behind a derived maneuver option."""
    trees = derivation_trees(result, ManeuverApplies(maneuver_id), max_trees)
    rules: set[str] = set()
    facts: set[str] = set()
    for t in trees:
        rules |= tree_rules(t)
        facts |= {a.fact for a in tree_assertions(t) if isinstance(a, FactApplies)}

    sources: set[str] = set()
    warnings: list[str] = []
    for rid in sorted(rules):
        sources.update(model.rules[rid].sources)
        if not model.rules[rid].sources:
            warnings.append(f"rule {rid} cites no knowledge source")
    for fid in sorted(facts):
        sources.update(model.facts[fid].sources)
        if not model.facts[fid].sources:
            warnings.append(f"fact {fid} cites no knowledge source")

    assumptions: set[str] = set()
    for rid in rules:
        assumptions.update(model.rules[rid].assumptions)
    touched = rules | facts
    for a in model.assumptions.values():
        if touched & set(a.attached_to):
            assumptions.add(a.id)

    analyses = {
        a.id for a in model.analyses.values() if a.referenced_ids() & touched or assumptions & set(a.assumptions)
    }
    return TraceReport(
        maneuver_id,
        tuple(trees),
        frozenset(sources),
        frozenset(assumptions),
        frozenset(analyses),
        frozenset(rules),
        frozenset(facts),
        tuple(warnings),
    )


def render_tree(tree: Tree, indent: str = "") -> list[str]:
    if isinstance(tree, Leaf):
        return [f"{indent}{format_assertion(tree.root)}  [scenario]"]
    binding = ", ".join(f"?{k}={v}" for k, v in tree.binding)
    suffix = f" {{{binding}}}" if binding else ""
    lines = [f"{indent}{format_assertion(tree.root)}  <= {tree.rule}{suffix}"]
    for c in tree.children:
        lines.extend(render_tree(c, indent + "    "))
    return lines


def render_report(model: SpecModel, report: TraceReport) -> str:
    lines = [f"trace {report.target}"]
    for i, t in enumerate(report.trees, 1):
        lines.append(f"tree {i}:")
        lines.extend(render_tree(t, "    "))
    lines.append("sources:")
    for sid in sorted(report.sources):
        s = model.sources[sid]
        lines.append(f"    {sid} ({s.kind}): {s.citation}")
    lines.append("assumptions:")
    for aid in sorted(report.assumptions):
        lines.append(f"    {aid}: {model.assumptions[aid].statement}")
    lines.append("analyses:")
    for aid in sorted(report.analyses):
        lines.append(f"    {aid}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"
