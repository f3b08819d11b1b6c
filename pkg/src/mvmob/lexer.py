"""Tokenizer and token cursor shared by the expression and model parsers."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Optional

IDENT = "IDENT"
INT = "INT"
FLOAT = "FLOAT"
STRING = "STRING"
OP = "OP"
EOF = "EOF"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f]+)
  | (?P<comment>//[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<open_block>/\*)
  | (?P<float>-?\d+(?:\.\d+(?:[eE][+-]?\d+)?|[eE][+-]?\d+))
  | (?P<int>-?\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<open_string>"[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|==|!=|<=|>=|[<>{}():,.=])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: object
    line: int
    col: int
    end_line: int
    end_col: int

    def describe(self) -> str:
        if self.kind == EOF:
            return "end of input"
        return repr(self.text)


@dataclass(frozen=True)
class LexError:
    code: str
    message: str
    line: int
    col: int


class DSLSyntaxError(Exception):
    """A syntax error with a 1-based position and the set of tokens that would have been accepted."""

    def __init__(self, message: str, line: int, col: int, expected: Iterable[str] = (), code: str = "PAR001"):
        self.message = message
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        self.code = code
        super().__init__(self.__str__())

    def __str__(self) -> str:
        text = f"{self.line}:{self.col}: {self.message}"
        if self.expected:
            text += f" (expected one of: {', '.join(sorted(self.expected))})"
        return text


def tokenize(text: str) -> tuple[list[Token], list[LexError]]:
    tokens: list[Token] = []
    errors: list[LexError] = []
    pos = 0
    line, col = 1, 1
    n = len(text)

    def advance(chunk: str) -> tuple[int, int]:
        nl = chunk.count("\n")
        if nl:
            return line + nl, len(chunk) - chunk.rfind("\n")
        return line, col + len(chunk)

    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            errors.append(LexError("PAR002", f"unexpected character {text[pos]!r}", line, col))
            line, col = advance(text[pos])
            pos += 1
            continue
        kind = m.lastgroup
        chunk = m.group()
        end_line, end_col = advance(chunk)
        if kind == "open_block":
            errors.append(LexError("PAR003", "unterminated block comment", line, col))
            line, col = advance(text[pos:])
            pos = n
            break
        if kind == "open_string":
            errors.append(LexError("PAR002", "unterminated string literal", line, col))
        elif kind in ("float", "int", "string", "ident", "op"):
            value: object = chunk
            tkind = {"float": FLOAT, "int": INT, "string": STRING, "ident": IDENT, "op": OP}[kind]
            if kind == "float":
                value = float(chunk)
            elif kind == "int":
                value = int(chunk)
            elif kind == "string":
                try:
                    value = json.loads(chunk, strict=False)  # raw tabs are fine
                except json.JSONDecodeError:
                    errors.append(LexError("PAR004", f"invalid escape in string {chunk}", line, col))
                    value = chunk[1:-1]
            tokens.append(Token(tkind, chunk, value, line, col, end_line, end_col - 1))
        line, col = end_line, end_col
        pos = m.end()
    tokens.append(Token(EOF, "", None, line, col, line, col))
    return tokens, errors


class TokenCursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != EOF:
            self.pos += 1
        return tok

    @property
    def previous(self) -> Token:
        return self.tokens[max(self.pos - 1, 0)]

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in (IDENT, OP) and tok.text == text

    def at_kind(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def error(self, message: str, expected: Iterable[str] = (), tok: Optional[Token] = None) -> DSLSyntaxError:
        tok = tok or self.peek()
        return DSLSyntaxError(message, tok.line, tok.col, expected)

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        raise self.error(f"expected {text!r}, found {self.peek().describe()}", {repr(text)})

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.at_kind(kind):
            return self.advance()
        raise self.error(f"expected {what}, found {self.peek().describe()}", {what})

    def expect_one_of(self, words: Iterable[str], what: str) -> Token:
        words = tuple(words)
        tok = self.peek()
        if tok.kind == IDENT and tok.text in words:
            return self.advance()
        raise self.error(f"expected {what}, found {tok.describe()}", {repr(w) for w in words})
