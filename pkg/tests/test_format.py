import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from behavspec import corpus
from behavspec.dsl import format_canonical, parse_text
from behavspec.testing import random_spec_text


def parse_ok(text):
    decls, diags = parse_text(text)
    assert not diags, [str(d) for d in diags]
    return decls


def test_empty_list_formats_to_empty_text():
    assert format_canonical([]) == ""


@pytest.mark.parametrize("name", [corpus.SPEC_V1, corpus.SPEC_V2, *corpus.SCENARIOS])
def test_corpus_round_trip(name):
    decls = parse_ok(corpus.read(name))
    text = format_canonical(decls)
    assert parse_ok(text) == decls
    assert format_canonical(parse_ok(text)) == text


def test_shuffled_whitespace_gives_identical_output():
    a = "rule R sources = [S]:\n    Car(?c), in_zone(?c, Z)\n    => maneuver(M)\n"
    b = "rule   R\tsources=[ S ] :  Car( ?c ) ^\n\n in_zone(?c,Z)   ->maneuver( M )"
    assert format_canonical(parse_ok(a)) == format_canonical(parse_ok(b))


def test_canonical_rule_layout():
    text = format_canonical(parse_ok("rule R assumes=[A] sources=[S]: applies(F), mission_is(Go) => maneuver(M)"))
    assert text == "rule R sources = [S] assumes = [A]:\n    applies(F),\n    mission_is(Go)\n    => maneuver(M)\n"


def test_numbers_and_strings_survive():
    decls = parse_ok('characteristic C params (P unit = "a\\"b\\\\c\\n" range = [-1/3, 2.125])')
    text = format_canonical(decls)
    assert parse_ok(text) == decls
    assert "-1/3" in text and "2.125" in text


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_round_trip_on_generated_specs(seed):
    decls = parse_ok(random_spec_text(random.Random(seed)))
    text = format_canonical(decls)
    assert parse_ok(text) == decls
    assert format_canonical(parse_ok(text)) == text
