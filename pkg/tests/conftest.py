from pathlib import Path

import pytest

from behavspec import corpus
from behavspec.dsl import parse_scenario_text, parse_text
from behavspec.model import resolve, resolve_scenario
from behavspec.reasoner import evaluate_scenario

TESTS = Path(__file__).parent
GOLDEN = TESTS / "golden"
FIXTURES = TESTS / "fixtures"


def load_model(text: str, file: str = "<test>"):
    decls, diags = parse_text(text, file)
    assert not diags, [str(d) for d in diags]
    return resolve(decls)


def load_scenario(model, text: str, file: str = "<test>"):
    decl, diags = parse_scenario_text(text, file)
    assert not diags, [str(d) for d in diags]
    return resolve_scenario(model, decl)


def corpus_run(spec: str, scen: str):
    model = load_model(corpus.read(spec), spec)
    scenario = load_scenario(model, corpus.read(scen), scen)
    return model, scenario, evaluate_scenario(model, scenario)


@pytest.fixture(scope="session")
def v1():
    return load_model(corpus.read(corpus.SPEC_V1), corpus.SPEC_V1)


@pytest.fixture(scope="session")
def v2():
    return load_model(corpus.read(corpus.SPEC_V2), corpus.SPEC_V2)


@pytest.fixture(scope="session")
def dup_head():
    model = load_model((FIXTURES / "dup_head.nspec").read_text(), "dup_head.nspec")
    scen = load_scenario(model, (FIXTURES / "dup_head.nscen").read_text(), "dup_head.nscen")
    return model, scen, evaluate_scenario(model, scen)
