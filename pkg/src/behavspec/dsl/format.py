"""Deterministic pretty-printer for raw declarations."""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from typing import Iterable

from behavspec.dsl import ast

INDENT = "    "


def _str(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def _num(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    d = value.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d != 1:
        return f"{value.numerator}/{value.denominator}"
    k = 0
    while 10**k % value.denominator:
        k += 1
    scaled = value.numerator * (10**k // value.denominator)
    return format(Decimal(scaled).scaleb(-k), "f")


def _list(items: Iterable[str], open_: str = "[", close: str = "]") -> str:
    return open_ + ", ".join(items) + close


def _term(t: ast.Term) -> str:
    return str(t)


def format_atom(atom: ast.Atom) -> str:
    if isinstance(atom, ast.ClassAtom):
        return f"{atom.cls}({_term(atom.term)})"
    if isinstance(atom, ast.ZoneAtom):
        return f"{atom.zone}({_term(atom.term)})"
    if isinstance(atom, ast.InZoneAtom):
        return f"in_zone({_term(atom.entity)}, {_term(atom.zone)})"
    if isinstance(atom, ast.AppliesAtom):
        return f"applies({atom.fact})"
    return f"mission_is({atom.mission})"


def format_head(head: ast.Head) -> str:
    if isinstance(head, ast.FactHead):
        return f"applies({head.fact})"
    return f"maneuver({head.maneuver})"


def _clauses(parts: list[str]) -> str:
    return "".join(" " + p for p in parts if p)


def _opt(word: str, value, render) -> str:
    return f"{word} = {render(value)}" if value else ""


def format_decl(d: ast.RawDecl) -> str:
    if isinstance(d, ast.ClassDecl):
        out = f"class {d.name}"
        if d.parent:
            out += f" : {d.parent}"
        if d.characteristics:
            out += " " + _list(d.characteristics, "{ ", " }")
        return out
    if isinstance(d, ast.CharacteristicDecl):
        out = f"characteristic {d.name}"
        if d.parent:
            out += f" : {d.parent}"
        if d.params:
            rendered = []
            for p in d.params:
                s = f"{p.name} unit = {_str(p.unit)}"
                if p.range is not None:
                    s += f" range = [{_num(p.range[0])}, {_num(p.range[1])}]"
                rendered.append(s)
            out += " params (" + ", ".join(rendered) + ")"
        return out
    if isinstance(d, ast.ZoneDecl):
        out = f"zone {d.name}"
        if d.grid:
            out += f" grid = {d.grid}"
        if d.neighbors:
            out += " neighbors (" + ", ".join(f"{k} -> {z}" for k, z in d.neighbors) + ")"
        return out
    if isinstance(d, ast.SourceDecl):
        return f"source {d.name}" + _clauses(
            [
                f"kind = {d.source_kind}",
                f"citation = {_str(d.citation)}",
                f"excerpt = {_str(d.excerpt)}" if d.excerpt is not None else "",
                _opt("allow", d.allow, _list),
            ]
        )
    if isinstance(d, ast.FactDecl):
        return f"fact {d.name}" + _clauses(
            [
                f"kind = {d.fact_kind}",
                _opt("sources", d.sources, _list),
                f"desc = {_str(d.desc)}" if d.desc is not None else "",
                _opt("allow", d.allow, _list),
            ]
        )
    if isinstance(d, ast.ManeuverDecl):
        return f"maneuver {d.name}" + _clauses(
            [f"lateral = {d.lateral}", f"longitudinal = {d.longitudinal}", _opt("allow", d.allow, _list)]
        )
    if isinstance(d, ast.MissionDecl):
        return f"mission {d.name}" + (f" desc = {_str(d.desc)}" if d.desc is not None else "")
    if isinstance(d, ast.RuleDecl):
        header = f"rule {d.name}" + _clauses([_opt("sources", d.sources, _list), _opt("assumes", d.assumes, _list)])
        body = (",\n" + INDENT).join(format_atom(a) for a in d.body)
        return f"{header}:\n{INDENT}{body}\n{INDENT}=> {format_head(d.head)}"
    if isinstance(d, ast.ConflictDecl):
        return f"conflict {d.name} " + _list(d.members, "{ ", " }")
    if isinstance(d, ast.AnalysisDecl):
        lines = [f"analysis {d.name} {{"]
        if d.premise is not None:
            lines.append(f"{INDENT}premise {_str(d.premise)}")
        for item in d.definitions:
            lines.append(f"{INDENT}definition {_str(item.text)} from {item.source}")
        for item in d.subsumptions:
            refs = f" refs {_list(item.refs)}" if item.refs else ""
            lines.append(f"{INDENT}subsumption {_str(item.text)}{refs}")
        if d.result is not None:
            lines.append(f"{INDENT}result {_str(d.result)}")
        for a in d.assumptions:
            on = f" on {_list(a.on)}" if a.on else ""
            lines.append(f"{INDENT}assumption {a.name} {_str(a.statement)}{on}")
        lines.append("}")
        return "\n".join(lines)
    if isinstance(d, ast.ScenarioDecl):
        lines = [f"scenario {d.name} {{"]
        if d.ego is not None:
            cls = f" : {d.ego.cls}" if d.ego.cls else ""
            lines.append(f"{INDENT}ego {d.ego.entity}{cls} mission {d.ego.mission} in {d.ego.zone}")
        for p in d.placements:
            lines.append(f"{INDENT}entity {p.entity} : {p.cls} in {p.zone}")
        for fact in d.asserts:
            lines.append(f"{INDENT}assert applies({fact})")
        if d.expect is not None:
            lines.append(f"{INDENT}expect maneuvers = " + _list(d.expect, "{ ", " }"))
        lines.append("}")
        return "\n".join(lines)
    raise TypeError(f"not a declaration: {d!r}")


def format_canonical(decls: Iterable[ast.RawDecl]) -> str:
    """Render declarations as canonical text; empty input gives empty text."""
    blocks = [format_decl(d) for d in decls]
    return "\n\n".join(blocks) + "\n" if blocks else ""
