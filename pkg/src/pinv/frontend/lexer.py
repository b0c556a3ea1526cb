"""Tokenizer shared by the program and invariant-spec parsers.

Line comments start with ``#``.  Tokens carry 1-based line/column for
error reporting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(Exception):
    def __init__(self, line: int, col: int, message: str, origin: str | None = None):
        self.line = line
        self.col = col
        self.message = message
        self.origin = origin
        where = f"{origin}:" if origin else ""
        super().__init__(f"{where}{line}:{col}: {message}")


class DuplicateLocation(ParseError):
    pass


class ArityError(ParseError):
    pass


class DanglingSupportName(Exception):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # 'num' | 'ident' | 'op' | 'eof'
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|<-|->|<=|>=|!=|&&|\|\||[()\[\]{}<>=+\-,;:.!*])
    """,
    re.VERBOSE,
)


def tokenize(text: str, origin: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[pos]!r}", origin)
        pos = m.end()
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            col = 1
            continue
        if kind in ("ws", "comment"):
            col += len(lexeme)
            continue
        tokens.append(Token(kind, lexeme, line, col))
        col += len(lexeme)
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token], origin: str | None = None):
        self.tokens = tokens
        self.pos = 0
        self.origin = origin

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            raise self.error(f"expected {text!r}, found {tok.text!r}" if tok.kind != "eof" else f"expected {text!r}, found end of input")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what}, found {tok.text!r}" if tok.kind != "eof" else f"expected {what}, found end of input")
        return self.next()

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(tok.line, tok.col, message, self.origin)
