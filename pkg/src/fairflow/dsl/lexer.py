"""Tokenizer shared by program (.dp) and causal model (.scm) files."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import DslSyntaxError

KEYWORDS = frozenset({
    "program", "const", "if", "then", "else", "return",
    "and", "or", "not", "true", "false",
})

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<decimal>[0-9]+\.[0-9]+)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|!=|<=|>=|[-+*/<>=!(){}\[\],;:~])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "decimal", "ident", "kw", "op", "eof"
    text: str
    line: int
    column: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(text: str, origin: str = "<inline>") -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", origin,
                                 line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over tokens with diagnostic helpers used by both parsers."""

    def __init__(self, tokens: list[Token], origin: str):
        self.tokens = tokens
        self.origin = origin
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def lookahead(self, n: int = 1) -> Token:
        return self.tokens[min(self.pos + n, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, *texts: str) -> bool:
        tok = self.peek
        return tok.kind in ("kw", "op", "ident") and tok.text in texts

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            return self.advance()
        return None

    def error(self, message: str, expected: tuple[str, ...] = ()) -> DslSyntaxError:
        tok = self.peek
        return DslSyntaxError(f"{message}, found {tok.describe()}", self.origin,
                              tok.line, tok.column, expected)

    def expect(self, *texts: str) -> Token:
        tok = self.accept(*texts)
        if tok is None:
            raise self.error("unexpected token", tuple(repr(t) for t in texts))
        return tok

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.peek.kind != kind:
            raise self.error("unexpected token", (what,))
        return self.advance()
