"""Tokenizer for ``.nspec`` and ``.nscen`` files.

Accepts arbitrary bytes. Invalid UTF-8, stray characters and unterminated
strings become diagnostics; the lexer always runs to the end of the input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from behavspec.diagnostics import ERROR, Diagnostic, Span

KEYWORDS = frozenset(
    {
        "class",
        "characteristic",
        "zone",
        "source",
        "fact",
        "maneuver",
        "mission",
        "rule",
        "conflict",
        "analysis",
        "scenario",
        "applies",
        "in_zone",
        "mission_is",
    }
)

DECL_KEYWORDS = frozenset(
    {
        "class",
        "characteristic",
        "zone",
        "source",
        "fact",
        "maneuver",
        "mission",
        "rule",
        "conflict",
        "analysis",
        "scenario",
    }
)

# Diagnostics beyond this count are folded into a single TooManyErrors entry.
MAX_LEX_ERRORS = 200

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f\v\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\[^\n])*")
  | (?P<badstring>"(?:[^"\\\n]|\\[^\n])*\\?)
  | (?P<number>-?\d+/\d+|-?\d+(?:\.\d+)?)
  | (?P<var>\?[^\W\d]\w*)
  | (?P<ident>[^\W\d]\w*)
  | (?P<punct>=>|->|[:,^()\[\]{}=;])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str  # KW, IDENT, VAR, STRING, NUMBER, PUNCT, NEWLINE
    value: str
    span: Span = field(compare=False)

    def is_punct(self, value: str) -> bool:
        return self.kind == "PUNCT" and self.value == value

    def is_kw(self, value: str) -> bool:
        return self.kind == "KW" and self.value == value

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r}, {self.span})"


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def decode(data: bytes | str) -> str:
    """Decode input leniently; invalid sequences become U+FFFD for the lexer to flag."""
    if isinstance(data, str):
        return data
    return data.decode("utf-8", errors="replace")


def tokenize(data: bytes | str, file: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    text = decode(data)
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start = 1, 0
    pos, n = 0, len(text)

    def error(code, message, start, end):
        if len(diags) < MAX_LEX_ERRORS:
            diags.append(
                Diagnostic(ERROR, code, message, Span(file, line, start - line_start + 1, line, end - line_start + 1))
            )
        elif len(diags) == MAX_LEX_ERRORS:
            diags.append(
                Diagnostic(
                    ERROR,
                    "TooManyErrors",
                    "further lexical errors suppressed",
                    Span(file, line, start - line_start + 1, line, start - line_start + 1),
                )
            )

    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            if ch == "�":
                error("InvalidUtf8", "invalid UTF-8 byte sequence", pos, pos + 1)
            else:
                error("UnexpectedChar", f"unexpected character {ch!r}", pos, pos + 1)
            pos += 1
            continue
        kind = m.lastgroup
        start, end = m.span()
        span = Span(file, line, start - line_start + 1, line, end - line_start + 1)
        if kind == "newline":
            tokens.append(Token("NEWLINE", "\n", span))
            line += 1
            line_start = end
        elif kind in ("ws", "comment"):
            pass
        elif kind == "badstring":
            error("UnterminatedString", "unterminated string literal", start, end)
        elif kind == "string":
            tokens.append(Token("STRING", _unescape(m.group()[1:-1]), span))
        elif kind == "number":
            tokens.append(Token("NUMBER", m.group(), span))
        elif kind == "var":
            tokens.append(Token("VAR", m.group()[1:], span))
        elif kind == "ident":
            word = m.group()
            tokens.append(Token("KW" if word in KEYWORDS else "IDENT", word, span))
        else:
            tokens.append(Token("PUNCT", m.group(), span))
        pos = end
    return tokens, diags
