from behavspec.dsl.ast import *  # noqa: F401,F403
from behavspec.dsl.format import format_canonical
from behavspec.dsl.lexer import Token, tokenize
from behavspec.dsl.parser import parse_scenario, parse_scenario_text, parse_spec, parse_text

__all__ = [
    "Token",
    "tokenize",
    "parse_spec",
    "parse_scenario",
    "parse_text",
    "parse_scenario_text",
    "format_canonical",
]
