"""Tokenizer for minilang source text."""

from __future__ import annotations

import re
from typing import NamedTuple

from ..errors import LexError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f\v]+)
  | (?P<comment>//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\\\n]*(?:\\[^\n][^"\\\n]*)*")
  | (?P<op>->|==|!=|<=|>=|&&|\|\||[(){},;:.=<>+\-*/%!])
  | (?P<bad>.)
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
_UNESCAPES = {v: "\\" + k for k, v in _ESCAPES.items()}


class Token(NamedTuple):
    kind: str  # "int" | "ident" | "str" | "op" | "eof"
    text: str  # raw lexeme, exactly as written
    start: int
    end: int
    line: int
    col: int

    @property
    def value(self):
        if self.kind == "int":
            return int(self.text)
        if self.kind == "str":
            return unquote(self.text)
        return self.text


def unquote(lexeme: str) -> str:
    body = lexeme[1:-1]
    if "\\" not in body:
        return body
    out = []
    it = iter(body)
    for ch in it:
        if ch == "\\":
            out.append(_ESCAPES[next(it)])
        else:
            out.append(ch)
    return "".join(out)


def quote(value: str) -> str:
    """Render ``value`` as a minilang string literal."""
    return '"' + "".join(_UNESCAPES.get(ch, ch) for ch in value) + '"'


def tokenize(text: str, path: str = "<source>") -> list[Token]:
    """Split ``text`` into tokens, dropping whitespace and comments.

    The returned list always ends with an ``eof`` token.
    """
    tokens: list[Token] = []
    append = tokens.append
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        pos, end = m.span()
        if kind == "ws":
            nl = text.count("\n", pos, end)
            if nl:
                line += nl
                line_start = text.rindex("\n", pos, end) + 1
        elif kind == "comment":
            continue
        elif kind == "bad":
            what = "unterminated string" if text[pos] == '"' else f"unexpected character {text[pos]!r}"
            raise LexError(what, path, line, pos - line_start + 1)
        else:
            lexeme = m.group()
            if kind == "str":
                i = lexeme.find("\\")
                while i != -1:
                    if lexeme[i + 1] not in _ESCAPES:
                        raise LexError(f"unknown escape \\{lexeme[i + 1]}", path, line, pos - line_start + i + 1)
                    i = lexeme.find("\\", i + 2)
            append(Token(kind, lexeme, pos, end, line, pos - line_start + 1))
    n = len(text)
    tokens.append(Token("eof", "", n, n, line, n - line_start + 1))
    return tokens
