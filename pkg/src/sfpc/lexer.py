"""Tokenizer shared by the SFPC and Church front ends."""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"syntax error at line {line}, column {column}: {message}")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "num", "ident", "hole", "sym", "eof"
    text: str
    line: int
    column: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.line, self.column)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<hole>\?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>->|[\\().,:;=|{}\[\]*+/-])
    """,
    re.VERBOSE,
)


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        column = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, column)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, column))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def peek_at(self, offset: int) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek
        return tok.kind in ("sym", "ident") and tok.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        tok = self.peek
        if not self.at(text):
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek
        if tok.kind != "ident":
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek
        raise ParseError(message, tok.line, tok.column)
