"""Recursive-descent parser for specification and scenario files.

Statements end at a newline or ``;``. Inside a statement newlines are
insignificant, so long rule bodies may span several lines. After an error the
parser skips to the next declaration keyword at the start of a statement and
carries on, so one pass reports every malformed declaration.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from behavspec.diagnostics import ERROR, Diagnostic, Span
from behavspec.dsl import ast
from behavspec.dsl.lexer import DECL_KEYWORDS, Token, tokenize

FACT_KINDS = ("capturing", "inferred", "maneuver_fact")
SOURCE_KINDS = ("statute", "administrative_guideline", "court_case", "ethics_guideline", "expert_assumption", "other")
LATERAL = ("keep_lane", "change_lane", "pass")
LONGITUDINAL = ("start", "stop", "follow_desired_speed", "follow_target_vehicle")


def _is_word(tok: Optional[Token], word: str) -> bool:
    return tok is not None and tok.kind == "IDENT" and tok.value == word


class _Fail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _describe(tok: Optional[Token]) -> str:
    if tok is None:
        return "end of input"
    if tok.kind == "NEWLINE":
        return "end of line"
    if tok.kind == "STRING":
        return "string literal"
    return repr(tok.value)


class _Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.toks = tokens
        self.pos = 0
        self.file = file
        self.diags: list[Diagnostic] = []

    # -- token access ---------------------------------------------------------

    def _eof_span(self) -> Span:
        if not self.toks:
            return Span(self.file, 1, 1, 1, 1)
        last = self.toks[-1].span
        return Span(last.file, last.end_line, last.end_col, last.end_line, last.end_col)

    def peek(self) -> Optional[Token]:
        i = self.pos
        while i < len(self.toks) and self.toks[i].kind == "NEWLINE":
            i += 1
        return self.toks[i] if i < len(self.toks) else None

    def next(self) -> Token:
        while self.pos < len(self.toks) and self.toks[self.pos].kind == "NEWLINE":
            self.pos += 1
        if self.pos >= len(self.toks):
            raise self.fail("a token", None)
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str, found: Optional[Token]) -> _Fail:
        here = self.toks[self.pos] if self.pos < len(self.toks) else None
        if found is not None and found.kind == "KW" and found.value in DECL_KEYWORDS and here and here.kind == "NEWLINE":
            # the statement ended early; point at its line rather than the next one
            found = here
        span = found.span if found is not None else self._eof_span()
        msg = f"expected {expected}, found {_describe(found)}"
        return _Fail(Diagnostic(ERROR, "ParseError", msg, span))

    def expect_punct(self, value: str) -> Token:
        tok = self.peek()
        if tok is None or not tok.is_punct(value):
            raise self.fail(repr(value), tok)
        return self.next()

    def accept_punct(self, value: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.is_punct(value):
            self.next()
            return True
        return False

    def expect_kw(self, value: str) -> Token:
        tok = self.peek()
        if tok is None or not tok.is_kw(value):
            raise self.fail(repr(value), tok)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "IDENT":
            raise self.fail(what, tok)
        return self.next()

    def expect_word(self, word: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "IDENT" or tok.value != word:
            raise self.fail(repr(word), tok)
        return self.next()

    def expect_string(self) -> str:
        tok = self.peek()
        if tok is None or tok.kind != "STRING":
            raise self.fail("string literal", tok)
        return self.next().value

    def expect_choice(self, choices: tuple[str, ...]) -> str:
        tok = self.peek()
        if tok is None or tok.kind != "IDENT" or tok.value not in choices:
            raise self.fail("one of " + ", ".join(choices), tok)
        return self.next().value

    def ident_list(self, open_: str = "[", close: str = "]", min_items: int = 0) -> tuple[str, ...]:
        self.expect_punct(open_)
        items: list[str] = []
        if not self.accept_punct(close):
            items.append(self.expect_ident().value)
            while self.accept_punct(","):
                items.append(self.expect_ident().value)
            self.expect_punct(close)
        if len(items) < min_items:
            raise self.fail(f"at least {min_items} identifiers", self.toks[self.pos - 1])
        return tuple(items)

    def span_from(self, start: Token) -> Span:
        end = self.toks[self.pos - 1].span if self.pos > 0 else start.span
        return Span(self.file, start.span.start_line, start.span.start_col, end.end_line, end.end_col)

    def end_statement(self) -> None:
        if self.pos >= len(self.toks):
            return
        tok = self.toks[self.pos]
        if tok.kind == "NEWLINE":
            return
        if tok.is_punct(";"):
            self.pos += 1
            return
        raise self.fail("end of statement", tok)

    def clauses(self, handlers: dict[str, Callable[[], object]]) -> dict[str, object]:
        """Parse ``word = value`` style clauses in any order, each at most once."""
        seen: dict[str, object] = {}
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "IDENT" or tok.value not in handlers:
                return seen
            if tok.value in seen:
                raise _Fail(Diagnostic(ERROR, "ParseError", f"duplicate clause {tok.value!r}", tok.span))
            self.next()
            seen[tok.value] = handlers[tok.value]()

    def require(self, seen: dict, word: str, decl_tok: Token):
        if word not in seen:
            raise _Fail(Diagnostic(ERROR, "ParseError", f"missing required clause {word!r}", decl_tok.span))
        return seen[word]

    def _eq(self, fn):
        def run():
            self.expect_punct("=")
            return fn()

        return run

    # -- top level ------------------------------------------------------------

    def recover(self) -> None:
        start = self.pos
        self.pos = min(self.pos + 1, len(self.toks))
        while self.pos < len(self.toks):
            tok = self.toks[self.pos]
            prev = self.toks[self.pos - 1] if self.pos > 0 else None
            at_start = prev is None or prev.kind == "NEWLINE" or prev.is_punct(";")
            if tok.kind == "KW" and tok.value in DECL_KEYWORDS and at_start and self.pos > start:
                return
            self.pos += 1

    def parse_all(self) -> list[ast.RawDecl]:
        decls: list[ast.RawDecl] = []
        while True:
            while self.pos < len(self.toks) and (
                self.toks[self.pos].kind == "NEWLINE" or self.toks[self.pos].is_punct(";")
            ):
                self.pos += 1
            if self.pos >= len(self.toks):
                return decls
            try:
                decls.append(self.decl())
                self.end_statement()
            except _Fail as exc:
                self.diags.append(exc.diag)
                self.recover()

    def decl(self) -> ast.RawDecl:
        tok = self.peek()
        if tok is None or tok.kind != "KW" or tok.value not in DECL_KEYWORDS:
            raise self.fail("a declaration", tok)
        return getattr(self, "decl_" + tok.value)()

    # -- declarations ---------------------------------------------------------

    def decl_class(self) -> ast.ClassDecl:
        kw = self.expect_kw("class")
        name = self.expect_ident("class name").value
        parent = None
        chars: tuple[str, ...] = ()
        if self.accept_punct(":"):
            parent = self.expect_ident("layer or parent class").value
        tok = self.peek()
        if tok is not None and tok.is_punct("{"):
            chars = self.ident_list("{", "}")
        return ast.ClassDecl(name, parent, chars, span=self.span_from(kw))

    def _param(self) -> ast.ParamDecl:
        start = self.expect_ident("parameter name")
        seen = self.clauses({"unit": self._eq(self.expect_string), "range": self._eq(self._range)})
        unit = self.require(seen, "unit", start)
        return ast.ParamDecl(start.value, unit, seen.get("range"), span=self.span_from(start))

    def _number(self) -> Fraction:
        tok = self.peek()
        if tok is None or tok.kind != "NUMBER":
            raise self.fail("number", tok)
        return Fraction(self.next().value)

    def _range(self) -> tuple[Fraction, Fraction]:
        self.expect_punct("[")
        lo = self._number()
        self.expect_punct(",")
        hi = self._number()
        self.expect_punct("]")
        return (lo, hi)

    def decl_characteristic(self) -> ast.CharacteristicDecl:
        kw = self.expect_kw("characteristic")
        name = self.expect_ident("characteristic name").value
        parent = None
        params: list[ast.ParamDecl] = []
        if self.accept_punct(":"):
            parent = self.expect_ident("parent characteristic").value
        tok = self.peek()
        if tok is not None and tok.kind == "IDENT" and tok.value == "params":
            self.next()
            self.expect_punct("(")
            while not self.accept_punct(")"):
                params.append(self._param())
                if not self.accept_punct(","):
                    self.expect_punct(")")
                    break
        return ast.CharacteristicDecl(name, parent, tuple(params), span=self.span_from(kw))

    def _neighbors(self) -> tuple[tuple[str, str], ...]:
        self.expect_punct("(")
        out: list[tuple[str, str]] = []
        while not self.accept_punct(")"):
            direction = self.expect_ident("direction").value
            self.expect_punct("->")
            out.append((direction, self.expect_ident("zone").value))
            if not self.accept_punct(","):
                self.expect_punct(")")
                break
        return tuple(out)

    def decl_zone(self) -> ast.ZoneDecl:
        kw = self.expect_kw("zone")
        name = self.expect_ident("zone name").value
        seen = self.clauses({"grid": self._eq(lambda: self.expect_ident().value), "neighbors": self._neighbors})
        return ast.ZoneDecl(name, seen.get("grid"), seen.get("neighbors", ()), span=self.span_from(kw))

    def decl_source(self) -> ast.SourceDecl:
        kw = self.expect_kw("source")
        name = self.expect_ident("source name").value
        seen = self.clauses(
            {
                "kind": self._eq(lambda: self.expect_choice(SOURCE_KINDS)),
                "citation": self._eq(self.expect_string),
                "excerpt": self._eq(self.expect_string),
                "allow": self._eq(self.ident_list),
            }
        )
        return ast.SourceDecl(
            name,
            self.require(seen, "kind", kw),
            self.require(seen, "citation", kw),
            seen.get("excerpt"),
            seen.get("allow", ()),
            span=self.span_from(kw),
        )

    def decl_fact(self) -> ast.FactDecl:
        kw = self.expect_kw("fact")
        name = self.expect_ident("fact name").value
        seen = self.clauses(
            {
                "kind": self._eq(lambda: self.expect_choice(FACT_KINDS)),
                "sources": self._eq(self.ident_list),
                "desc": self._eq(self.expect_string),
                "allow": self._eq(self.ident_list),
            }
        )
        return ast.FactDecl(
            name,
            self.require(seen, "kind", kw),
            seen.get("sources", ()),
            seen.get("desc"),
            seen.get("allow", ()),
            span=self.span_from(kw),
        )

    def decl_maneuver(self) -> ast.ManeuverDecl:
        kw = self.expect_kw("maneuver")
        name = self.expect_ident("maneuver name").value
        seen = self.clauses(
            {
                "lateral": self._eq(lambda: self.expect_choice(LATERAL)),
                "longitudinal": self._eq(lambda: self.expect_choice(LONGITUDINAL)),
                "allow": self._eq(self.ident_list),
            }
        )
        return ast.ManeuverDecl(
            name,
            self.require(seen, "lateral", kw),
            self.require(seen, "longitudinal", kw),
            seen.get("allow", ()),
            span=self.span_from(kw),
        )

    def decl_mission(self) -> ast.MissionDecl:
        kw = self.expect_kw("mission")
        name = self.expect_ident("mission name").value
        seen = self.clauses({"desc": self._eq(self.expect_string)})
        return ast.MissionDecl(name, seen.get("desc"), span=self.span_from(kw))

    def _term(self) -> ast.Term:
        tok = self.peek()
        if tok is not None and tok.kind == "VAR":
            return ast.Var(self.next().value)
        if tok is not None and tok.kind == "IDENT":
            return self.next().value
        raise self.fail("variable or constant", tok)

    def _atom(self) -> ast.Atom:
        tok = self.peek()
        if tok is not None and tok.is_kw("applies"):
            self.next()
            self.expect_punct("(")
            fact = self.expect_ident("fact").value
            self.expect_punct(")")
            return ast.AppliesAtom(fact)
        if tok is not None and tok.is_kw("mission_is"):
            self.next()
            self.expect_punct("(")
            mission = self.expect_ident("mission").value
            self.expect_punct(")")
            return ast.MissionAtom(mission)
        if tok is not None and tok.is_kw("in_zone"):
            self.next()
            self.expect_punct("(")
            entity = self._term()
            self.expect_punct(",")
            zone = self._term()
            self.expect_punct(")")
            return ast.InZoneAtom(entity, zone)
        if tok is not None and tok.kind == "IDENT":
            cls = self.next().value
            self.expect_punct("(")
            term = self._term()
            self.expect_punct(")")
            return ast.ClassAtom(cls, term)
        raise self.fail("body atom", tok)

    def _head(self) -> ast.Head:
        tok = self.peek()
        if tok is not None and tok.is_kw("applies"):
            self.next()
            self.expect_punct("(")
            fact = self.expect_ident("fact").value
            self.expect_punct(")")
            return ast.FactHead(fact)
        if tok is not None and tok.is_kw("maneuver"):
            self.next()
            self.expect_punct("(")
            m = self.expect_ident("maneuver").value
            self.expect_punct(")")
            return ast.ManeuverHead(m)
        raise self.fail("'applies(...)' or 'maneuver(...)'", tok)

    def decl_rule(self) -> ast.RuleDecl:
        kw = self.expect_kw("rule")
        name = self.expect_ident("rule name").value
        seen = self.clauses({"sources": self._eq(self.ident_list), "assumes": self._eq(self.ident_list)})
        self.expect_punct(":")
        body = [self._atom()]
        while True:
            tok = self.peek()
            if tok is not None and (tok.is_punct(",") or tok.is_punct("^")):
                self.next()
                body.append(self._atom())
            else:
                break
        tok = self.peek()
        if tok is None or not (tok.is_punct("=>") or tok.is_punct("->")):
            raise self.fail("'=>'", tok)
        self.next()
        head = self._head()
        return ast.RuleDecl(
            name, tuple(body), head, seen.get("sources", ()), seen.get("assumes", ()), span=self.span_from(kw)
        )

    def decl_conflict(self) -> ast.ConflictDecl:
        kw = self.expect_kw("conflict")
        name = self.expect_ident("conflict name").value
        members = self.ident_list("{", "}")
        return ast.ConflictDecl(name, members, span=self.span_from(kw))

    def _skip_separators(self) -> None:
        while self.pos < len(self.toks) and (
            self.toks[self.pos].kind == "NEWLINE" or self.toks[self.pos].is_punct(";")
        ):
            self.pos += 1

    def decl_analysis(self) -> ast.AnalysisDecl:
        kw = self.expect_kw("analysis")
        name = self.expect_ident("analysis name").value
        self.expect_punct("{")
        premise = result = None
        definitions: list[ast.DefinitionItem] = []
        subsumptions: list[ast.SubsumptionItem] = []
        assumptions: list[ast.AssumptionItem] = []
        while True:
            self._skip_separators()
            if self.accept_punct("}"):
                break
            tok = self.peek()
            word = tok.value if tok is not None and tok.kind == "IDENT" else None
            if word == "premise":
                if premise is not None:
                    raise _Fail(Diagnostic(ERROR, "ParseError", "duplicate premise", tok.span))
                self.next()
                premise = self.expect_string()
            elif word == "result":
                if result is not None:
                    raise _Fail(Diagnostic(ERROR, "ParseError", "duplicate result", tok.span))
                self.next()
                result = self.expect_string()
            elif word == "definition":
                self.next()
                text = self.expect_string()
                self.expect_word("from")
                definitions.append(ast.DefinitionItem(text, self.expect_ident("source").value))
            elif word == "subsumption":
                self.next()
                text = self.expect_string()
                refs: tuple[str, ...] = ()
                nxt = self.peek()
                if nxt is not None and nxt.kind == "IDENT" and nxt.value == "refs":
                    self.next()
                    refs = self.ident_list()
                subsumptions.append(ast.SubsumptionItem(text, refs))
            elif word == "assumption":
                self.next()
                aname = self.expect_ident("assumption name")
                statement = self.expect_string()
                on: tuple[str, ...] = ()
                nxt = self.peek()
                if nxt is not None and nxt.kind == "IDENT" and nxt.value == "on":
                    self.next()
                    on = self.ident_list()
                assumptions.append(ast.AssumptionItem(aname.value, statement, on, span=self.span_from(aname)))
            else:
                raise self.fail("'premise', 'definition', 'subsumption', 'result', 'assumption' or '}'", tok)
            self._item_end()
        return ast.AnalysisDecl(
            name,
            premise,
            tuple(definitions),
            tuple(subsumptions),
            result,
            tuple(assumptions),
            span=self.span_from(kw),
        )

    def _item_end(self) -> None:
        if self.pos >= len(self.toks):
            return
        tok = self.toks[self.pos]
        if tok.kind == "NEWLINE" or tok.is_punct(";") or tok.is_punct("}"):
            return
        raise self.fail("end of item", tok)

    def decl_scenario(self) -> ast.ScenarioDecl:
        kw = self.expect_kw("scenario")
        name = self.expect_ident("scenario name").value
        self.expect_punct("{")
        placements: list[ast.Placement] = []
        asserts: list[str] = []
        ego = None
        expect = None
        while True:
            self._skip_separators()
            if self.accept_punct("}"):
                break
            tok = self.peek()
            if _is_word(tok, "entity"):
                self.next()
                ent = self.expect_ident("entity name").value
                self.expect_punct(":")
                cls = self.expect_ident("class").value
                self.expect_word("in")
                zone = self.expect_ident("zone").value
                placements.append(ast.Placement(ent, cls, zone, span=self.span_from(tok)))
            elif _is_word(tok, "ego"):
                if ego is not None:
                    raise _Fail(Diagnostic(ERROR, "ParseError", "duplicate ego declaration", tok.span))
                self.next()
                ent = self.expect_ident("ego entity name").value
                cls = None
                if self.accept_punct(":"):
                    cls = self.expect_ident("class").value
                self.expect_kw("mission")
                mission = self.expect_ident("mission").value
                self.expect_word("in")
                zone = self.expect_ident("zone").value
                ego = ast.EgoDecl(ent, cls, mission, zone, span=self.span_from(tok))
            elif _is_word(tok, "assert"):
                self.next()
                self.expect_kw("applies")
                self.expect_punct("(")
                asserts.append(self.expect_ident("fact").value)
                self.expect_punct(")")
            elif _is_word(tok, "expect"):
                if expect is not None:
                    raise _Fail(Diagnostic(ERROR, "ParseError", "duplicate expectation", tok.span))
                self.next()
                self.expect_word("maneuvers")
                self.expect_punct("=")
                expect = self.ident_list("{", "}")
            else:
                raise self.fail("'entity', 'ego', 'assert', 'expect' or '}'", tok)
            self._item_end()
        return ast.ScenarioDecl(name, tuple(placements), ego, tuple(asserts), expect, span=self.span_from(kw))


def parse_spec(tokens: list[Token], file: str = "<input>") -> tuple[list[ast.RawDecl], list[Diagnostic]]:
    """Parse a token stream into declarations, collecting every syntax error."""
    if tokens:
        file = tokens[0].span.file
    p = _Parser(tokens, file)
    decls = p.parse_all()
    return decls, p.diags


def parse_scenario(tokens: list[Token], file: str = "<input>") -> tuple[Optional[ast.ScenarioDecl], list[Diagnostic]]:
    """Parse a scenario file, which must hold exactly one ``scenario`` block."""
    decls, diags = parse_spec(tokens, file)
    if tokens:
        file = tokens[0].span.file
    scenarios = [d for d in decls if isinstance(d, ast.ScenarioDecl)]
    for d in decls:
        if not isinstance(d, ast.ScenarioDecl):
            diags.append(Diagnostic(ERROR, "ParseError", f"unexpected {d.kind} declaration in scenario file", d.span))
    for extra in scenarios[1:]:
        diags.append(Diagnostic(ERROR, "ParseError", "more than one scenario in file", extra.span))
    if not scenarios and not diags:
        span = tokens[-1].span if tokens else Span(file, 1, 1, 1, 1)
        diags.append(Diagnostic(ERROR, "ParseError", "expected a scenario declaration", span))
    return (scenarios[0] if scenarios else None), diags


def parse_text(data: bytes | str, file: str = "<input>") -> tuple[list[ast.RawDecl], list[Diagnostic]]:
    tokens, lex_diags = tokenize(data, file)
    decls, parse_diags = parse_spec(tokens, file)
    return decls, lex_diags + parse_diags


def parse_scenario_text(data: bytes | str, file: str = "<input>") -> tuple[Optional[ast.ScenarioDecl], list[Diagnostic]]:
    tokens, lex_diags = tokenize(data, file)
    scen, parse_diags = parse_scenario(tokens, file)
    return scen, lex_diags + parse_diags
