"""Random spec and scene generators for property tests and benchmarks.

Everything here is driven by a ``random.Random`` so a seed reproduces the
instance exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from behavspec.dsl import parse_text
from behavspec.dsl.parser import LATERAL, LONGITUDINAL, SOURCE_KINDS
from behavspec.model import LAYER_NAMES, SpecModel, resolve
from behavspec.reasoner import EntityIn, FactApplies, GroundAssertion, MissionIs, WorkingMemory

LAYERS = sorted(LAYER_NAMES)
VARS = ("a", "b", "c", "d")


@dataclass(frozen=True)
class Instance:
    text: str
    model: SpecModel
    wm: WorkingMemory


def random_model_text(
    rng: random.Random,
    *,
    max_rules: int = 20,
    max_zones: int = 8,
    max_classes: int = 8,
    max_facts: int = 10,
) -> str:
    """A resolvable spec with a class forest, zones, facts, maneuvers and rules."""
    lines = ["source S0 kind = statute citation = \"generated\""]
    classes = []
    for i in range(rng.randint(1, max_classes)):
        parent = rng.choice(classes) if classes and rng.random() < 0.6 else rng.choice(LAYERS)
        lines.append(f"class C{i} : {parent}")
        classes.append(f"C{i}")
    zones = [f"Z{i}" for i in range(rng.randint(1, max_zones))]
    for z in zones:
        lines.append(f"zone {z}")
    facts = [f"F{i}" for i in range(rng.randint(1, max_facts))]
    for f in facts:
        kind = rng.choice(("capturing", "inferred"))
        lines.append(f"fact {f} kind = {kind} sources = [S0]")
    pairs = [(lat, lon) for lat in LATERAL for lon in LONGITUDINAL]
    maneuvers = []
    for i, (lat, lon) in enumerate(rng.sample(pairs, rng.randint(1, 4))):
        lines.append(f"maneuver M{i} lateral = {lat} longitudinal = {lon}")
        maneuvers.append(f"M{i}")
    missions = ["Go", "Park"]
    for m in missions:
        lines.append(f"mission {m}")

    for r in range(rng.randint(0, max_rules)):
        atoms = []
        # at most two entity variables per rule keeps binding counts realistic
        rule_vars = rng.sample(VARS, rng.randint(1, 2))
        for _ in range(rng.randint(1, 4)):
            roll = rng.random()
            v = "?" + rng.choice(rule_vars)
            if roll < 0.35:
                atoms.append(f"{rng.choice(classes)}({v})")
            elif roll < 0.6:
                zone = rng.choice(zones) if rng.random() < 0.6 else "?z" + rng.choice("12")
                atoms.append(f"in_zone({v}, {zone})")
                if zone.startswith("?") and rng.random() < 0.4:
                    atoms.append(f"{rng.choice(zones)}({zone})")
            elif roll < 0.65:
                atoms.append(f"{rng.choice(zones)}(?z{rng.choice('12')})")
            elif roll < 0.92:
                atoms.append(f"applies({rng.choice(facts)})")
            else:
                atoms.append(f"mission_is({rng.choice(missions)})")
        if rng.random() < 0.75:
            head = f"applies({rng.choice(facts)})"
        else:
            head = f"maneuver({rng.choice(maneuvers)})"
        lines.append(f"rule R{r} sources = [S0]: {', '.join(atoms)} => {head}")
    return "\n".join(lines) + "\n"


def random_scene(
    rng: random.Random, model: SpecModel, *, max_entities: int = 30, max_asserts: int = 3
) -> frozenset[GroundAssertion]:
    classes = sorted(model.classes)
    zones = sorted(model.zones)
    out: set[GroundAssertion] = set()
    for i in range(rng.randint(0, max_entities)):
        out.add(EntityIn(f"e{i}", rng.choice(classes), rng.choice(zones)))
        if rng.random() < 0.05:
            # the same entity seen in a second zone
            out.add(EntityIn(f"e{i}", rng.choice(classes), rng.choice(zones)))
    for f in rng.sample(sorted(model.facts), rng.randint(0, min(max_asserts, len(model.facts)))):
        out.add(FactApplies(f))
    if rng.random() < 0.7:
        out.add(MissionIs(rng.choice(sorted(model.missions))))
    return frozenset(out)


def random_instance(
    seed: int,
    *,
    max_entities: int = 30,
    max_rules: int = 20,
    max_zones: int = 8,
) -> Instance:
    rng = random.Random(seed)
    text = random_model_text(rng, max_rules=max_rules, max_zones=max_zones)
    decls, diags = parse_text(text, f"<random {seed}>")
    assert not diags, diags
    model = resolve(decls)
    scene = random_scene(rng, model, max_entities=max_entities)
    ego = min((a.entity for a in scene if isinstance(a, EntityIn)), default=None)
    return Instance(text, model, WorkingMemory(scene, f"random{seed}", ego))


def random_subset(rng: random.Random, assertions: frozenset[GroundAssertion]) -> frozenset[GroundAssertion]:
    return frozenset(a for a in sorted(assertions, key=repr) if rng.random() < 0.5)


# -- free-form spec text for parser round trips -------------------------------

_WORDS = ("Alpha", "Beta", "Gamma", "Delta", "Lane", "Sign", "Walker", "Zone", "Car", "Stop")


def _ident(rng: random.Random, prefix: str = "") -> str:
    return prefix + rng.choice(_WORDS) + str(rng.randint(0, 99))


def _string(rng: random.Random) -> str:
    chars = 'ab cd"\\\tüß€x\n'
    body = "".join(rng.choice(chars) for _ in range(rng.randint(0, 12)))
    return '"' + body.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def _number(rng: random.Random) -> str:
    roll = rng.random()
    if roll < 0.4:
        return str(rng.randint(-50, 50))
    if roll < 0.8:
        return f"{rng.randint(-50, 50)}.{rng.randint(0, 999)}"
    return f"{rng.randint(-9, 9)}/{rng.randint(1, 12)}"


def _list(rng: random.Random, items: list[str]) -> str:
    sep = rng.choice((", ", ",", " ,\n  "))
    return "[" + sep.join(items) + "]"


def _ids(rng: random.Random, prefix: str, k: int) -> list[str]:
    return sorted({_ident(rng, prefix) for _ in range(rng.randint(0, k))})


def random_spec_text(rng: random.Random, *, max_decls: int = 25) -> str:
    """Syntactically valid text (not necessarily resolvable) using every declaration form."""
    ws = lambda: rng.choice((" ", "  ", "\t"))  # noqa: E731
    out = []
    for _ in range(rng.randint(0, max_decls)):
        kind = rng.randrange(12)
        name = _ident(rng)
        if kind == 0:
            parent = f" : {rng.choice(LAYERS + [_ident(rng)])}" if rng.random() < 0.8 else ""
            chars = _ids(rng, "Ch", 3)
            block = " { " + ", ".join(chars) + " }" if chars else ""
            out.append(f"class {name}{parent}{block}")
        elif kind == 1:
            params = [
                f"{_ident(rng, 'P')} unit = {_string(rng)} range = [{_number(rng)}, {_number(rng)}]"
                for _ in range(rng.randint(0, 3))
            ]
            parent = f" : {_ident(rng)}" if rng.random() < 0.5 else ""
            tail = f" params ({', '.join(params)})" if params else ""
            out.append(f"characteristic {name}{parent}{tail}")
        elif kind == 2:
            nbrs = [f"{rng.choice(('front', 'back', 'left', 'right'))} -> {_ident(rng)}" for _ in range(rng.randint(0, 3))]
            grid = f" grid = {_ident(rng)}" if rng.random() < 0.5 else ""
            tail = f" neighbors ({', '.join(nbrs)})" if nbrs else ""
            out.append(f"zone {name}{grid}{tail}")
        elif kind == 3:
            excerpt = f" excerpt = {_string(rng)}" if rng.random() < 0.5 else ""
            out.append(f"source {name} kind = {rng.choice(SOURCE_KINDS)} citation = {_string(rng)}{excerpt}")
        elif kind == 4:
            srcs = _ids(rng, "S", 3)
            parts = [f"kind = {rng.choice(('capturing', 'inferred', 'maneuver_fact'))}"]
            if srcs or rng.random() < 0.3:
                parts.append(f"sources = {_list(rng, srcs)}")
            if rng.random() < 0.5:
                parts.append(f"desc = {_string(rng)}")
            if rng.random() < 0.2:
                parts.append("allow = [UnderivableFact]")
            rng.shuffle(parts)
            out.append(f"fact {name} " + ws().join(parts))
        elif kind == 5:
            out.append(
                f"maneuver {name} lateral = {rng.choice(LATERAL)} longitudinal = {rng.choice(LONGITUDINAL)}"
            )
        elif kind == 6:
            desc = f" desc = {_string(rng)}" if rng.random() < 0.5 else ""
            out.append(f"mission {name}{desc}")
        elif kind == 7:
            out.append(_random_rule(rng, name))
        elif kind == 8:
            members = sorted({_ident(rng) for _ in range(rng.randint(2, 4))})
            out.append(f"conflict {name} {{ {', '.join(members)} }}")
        elif kind == 9:
            items = [f"premise {_string(rng)}"]
            for _ in range(rng.randint(0, 2)):
                items.append(f"definition {_string(rng)} from {_ident(rng, 'S')}")
            for _ in range(rng.randint(0, 2)):
                items.append(f"subsumption {_string(rng)} refs {_list(rng, _ids(rng, 'R', 3))}")
            items.append(f"result {_string(rng)}")
            for _ in range(rng.randint(0, 2)):
                on = f" on {_list(rng, _ids(rng, 'R', 2))}" if rng.random() < 0.5 else ""
                items.append(f"assumption {_ident(rng, 'A_')} {_string(rng)}{on}")
            out.append(f"analysis {name} {{\n    " + "\n    ".join(items) + "\n}")
        elif kind == 10:
            items = []
            if rng.random() < 0.8:
                cls = f" : {_ident(rng)}" if rng.random() < 0.7 else ""
                items.append(f"ego {_ident(rng, 'e')}{cls} mission {_ident(rng)} in {_ident(rng)}")
            for _ in range(rng.randint(0, 4)):
                items.append(f"entity {_ident(rng, 'x')} : {_ident(rng)} in {_ident(rng)}")
            for _ in range(rng.randint(0, 2)):
                items.append(f"assert applies({_ident(rng)})")
            if rng.random() < 0.6:
                items.append("expect maneuvers = { " + ", ".join(_ids(rng, "M", 2)) + " }")
            out.append(f"scenario {name} {{\n    " + "\n    ".join(items) + "\n}")
        else:
            out.append(f"# {_ident(rng)} comment")
    sep = rng.choice(("\n", "\n\n", "\n# note\n", ";\n"))
    return sep.join(out) + "\n"


def _random_atom(rng: random.Random) -> str:
    v = "?" + rng.choice(VARS)
    roll = rng.randrange(4)
    if roll == 0:
        return f"{_ident(rng)}({v})"
    if roll == 1:
        zone = _ident(rng) if rng.random() < 0.5 else "?z"
        return f"in_zone({v}, {zone})"
    if roll == 2:
        return f"applies({_ident(rng)})"
    return f"mission_is({_ident(rng)})"


def _random_rule(rng: random.Random, name: str) -> str:
    atoms = [_random_atom(rng) for _ in range(rng.randint(1, 4))]
    conj = rng.choice((", ", " ^ ", ",\n    "))
    arrow = rng.choice(("=>", "->"))
    head = f"applies({_ident(rng)})" if rng.random() < 0.6 else f"maneuver({_ident(rng)})"
    clauses = []
    if rng.random() < 0.7:
        clauses.append(f" sources = {_list(rng, _ids(rng, 'S', 2))}")
    if rng.random() < 0.3:
        clauses.append(f" assumes = {_list(rng, _ids(rng, 'A_', 2))}")
    rng.shuffle(clauses)
    return f"rule {name}{''.join(clauses)}:\n    {conj.join(atoms)}\n    {arrow} {head}"


def fuzz_bytes(rng: random.Random, seeds: list[bytes], max_len: int = 2000) -> bytes:
    """Mutated corpus text or raw noise."""
    roll = rng.random()
    if roll < 0.2 or not seeds:
        return bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 200)))
    data = bytearray(rng.choice(seeds)[: max_len])
    for _ in range(rng.randint(1, 20)):
        op = rng.randrange(4)
        pos = rng.randint(0, len(data))
        if op == 0 and data:
            del data[pos : pos + rng.randint(1, 30)]
        elif op == 1:
            data[pos:pos] = bytes(rng.getrandbits(8) for _ in range(rng.randint(1, 8)))
        elif op == 2:
            data[pos:pos] = rng.choice((b"{", b"}", b"(", b")", b"=>", b'"', b"\n", b"rule ", b"?", b";", b"\\"))
        elif data:
            src = rng.randint(0, len(data) - 1)
            data[pos:pos] = data[src : src + rng.randint(1, 40)]
    return bytes(data)

