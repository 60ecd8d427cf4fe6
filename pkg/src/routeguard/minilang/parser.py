"""Recursive-descent parser: one source file in, a tuple of FunctionDefs out."""

from __future__ import annotations

from ..errors import ParseError
from .lexer import Token, tokenize
from .nodes import (
    TYPE_NAMES,
    Assign,
    Binary,
    BoolLit,
    Call,
    ExprStmt,
    ForwardCall,
    FunctionDef,
    If,
    IntLit,
    Let,
    Return,
    StrLit,
    Unary,
    Var,
    While,
)

KEYWORDS = frozenset(
    {"fn", "let", "if", "else", "while", "return", "true", "false", "forward_call"}
)
BUILTINS = {"print": 1, "str": 1, "len": 1}

# (operators, next level) from loosest to tightest binding
_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


class _Parser:
    def __init__(self, tokens: list[Token], path: str, file_id: str):
        self.toks = tokens
        self.pos = 0
        self.path = path
        self.file_id = file_id

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, self.path, tok.line, tok.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "ident")

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text or "end of file"
            raise self.error(f"expected {text!r}, got {got!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected {what}, got {t.text or 'end of file'!r}")
        return self.advance()

    def type_name(self) -> str:
        t = self.ident("type name")
        if t.text not in TYPE_NAMES:
            raise self.error(f"unknown type {t.text!r}", t)
        return t.text

    # -- declarations --------------------------------------------------
    def file(self) -> tuple:
        funcs = []
        while self.tok.kind != "eof":
            funcs.append(self.function())
        return tuple(funcs)

    def function(self) -> FunctionDef:
        kw = self.expect("fn")
        name = self.ident("function name")
        if name.text in BUILTINS:
            raise self.error(f"{name.text!r} is a builtin", name)
        self.expect("(")
        params = []
        while not self.at(")"):
            if params:
                self.expect(",")
            pname = self.ident("parameter name").text
            if any(p == pname for p, _ in params):
                raise self.error(f"duplicate parameter {pname!r}")
            self.expect(":")
            params.append((pname, self.type_name()))
        self.expect(")")
        ret = "Unit"
        if self.at("->"):
            self.advance()
            ret = self.type_name()
        body = self.block()
        return FunctionDef(self.file_id, name.text, tuple(params), ret, body, kw.line)

    # -- statements ----------------------------------------------------
    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.statement())
        self.advance()
        return tuple(stmts)

    def statement(self):
        t = self.tok
        if self.at("let"):
            self.advance()
            name = self.ident("variable name").text
            ty = None
            if self.at(":"):
                self.advance()
                ty = self.type_name()
            self.expect("=")
            expr = self.expression()
            self.expect(";")
            return Let(name, ty, expr, t.line)
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.advance()
            cond = self.expression()
            return While(cond, self.block(), t.line)
        if self.at("return"):
            self.advance()
            expr = None if self.at(";") else self.expression()
            self.expect(";")
            return Return(expr, t.line)
        if t.kind == "ident" and t.text not in KEYWORDS and self.peek().text == "=" and self.peek().kind == "op":
            self.advance()
            self.advance()
            expr = self.expression()
            self.expect(";")
            return Assign(t.text, expr, t.line)
        expr = self.expression()
        self.expect(";")
        return ExprStmt(expr, t.line)

    def if_stmt(self) -> If:
        t = self.expect("if")
        cond = self.expression()
        then = self.block()
        orelse: tuple = ()
        if self.at("else"):
            self.advance()
            orelse = (self.if_stmt(),) if self.at("if") else self.block()
        return If(cond, then, orelse, t.line)

    # -- expressions ---------------------------------------------------
    def expression(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        ops = _BINARY_LEVELS[level]
        left = self.expression(level + 1)
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance().text
            right = self.expression(level + 1)
            left = Binary(op, left, right, left.start, right.end)
        return left

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in ("-", "!"):
            self.advance()
            operand = self.unary()
            return Unary(t.text, operand, t.start, operand.end)
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), t.start, t.end)
        if t.kind == "str":
            self.advance()
            return StrLit(t.value, t.start, t.end)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if t.kind != "ident":
            raise self.error(f"unexpected {t.text or 'end of file'!r}")
        if t.text in ("true", "false"):
            self.advance()
            return BoolLit(t.text == "true", t.start, t.end)
        if t.text == "forward_call":
            return self.forward_call()
        name = self.ident()
        if self.at("("):
            args, end = self.arguments()
            return Call(None, name.text, args, name.start, end, name.line)
        if self.at(".") and self.peek().kind == "ident":
            self.advance()
            fn = self.ident("function name")
            if not self.at("("):
                raise self.error("expected '(' after qualified name")
            args, end = self.arguments()
            return Call(name.text, fn.text, args, name.start, end, name.line)
        return Var(name.text, name.start, name.end)

    def arguments(self) -> tuple[tuple, int]:
        self.expect("(")
        args = []
        while not self.at(")"):
            if args:
                self.expect(",")
            args.append(self.expression())
        end = self.advance().end
        return tuple(args), end

    def forward_call(self) -> ForwardCall:
        kw = self.advance()
        self.expect("(")
        if self.tok.kind != "str":
            raise self.error("forward_call needs a string descriptor as first argument")
        envelope = self.advance().value
        args = []
        hint = None
        while not self.at(")"):
            self.expect(",")
            if self.at("hint") and self.peek().text == ":":
                self.advance()
                self.advance()
                if self.tok.kind != "str":
                    raise self.error("hint must be a string literal")
                hint = self.advance().value
                if not self.at(")"):
                    raise self.error("hint must be the last argument")
                break
            args.append(self.expression())
        end = self.expect(")").end
        return ForwardCall(envelope, tuple(args), hint, kw.start, end, kw.line)


def parse_file(text: str, file_id: str, path: str = "<source>") -> tuple:
    """Parse one file's text into its FunctionDefs."""
    return _Parser(tokenize(text, path), path, file_id).file()
