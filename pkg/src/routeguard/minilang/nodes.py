"""AST node types. Every node is immutable; expressions carry source offsets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

TYPE_NAMES = ("Int", "Str", "Bool", "Unit")


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class StrLit:
    value: str
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class Unary:
    op: str
    operand: "Expr"
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class Call:
    """``name(args)`` or ``Qualifier.name(args)``; ``qualifier`` is None for same-file and builtin calls."""

    qualifier: Optional[str]
    name: str
    args: tuple
    start: int
    end: int
    line: int


@dataclass(frozen=True, slots=True)
class ForwardCall:
    envelope: str
    args: tuple
    hint: Optional[str]
    start: int
    end: int
    line: int


Literal = Union[IntLit, StrLit, BoolLit]
Expr = Union[IntLit, StrLit, BoolLit, Var, Unary, Binary, Call, ForwardCall]
LITERALS = (IntLit, StrLit, BoolLit)


@dataclass(frozen=True, slots=True)
class Let:
    name: str
    type: Optional[str]
    expr: Expr
    line: int


@dataclass(frozen=True, slots=True)
class Assign:
    name: str
    expr: Expr
    line: int


@dataclass(frozen=True, slots=True)
class If:
    cond: Expr
    then: tuple
    orelse: tuple
    line: int


@dataclass(frozen=True, slots=True)
class While:
    cond: Expr
    body: tuple
    line: int


@dataclass(frozen=True, slots=True)
class Return:
    expr: Optional[Expr]
    line: int


@dataclass(frozen=True, slots=True)
class ExprStmt:
    expr: Expr
    line: int


@dataclass(frozen=True)
class FunctionDef:
    file_id: str
    name: str
    params: tuple  # ((name, type_name), ...)
    return_type: str
    body: tuple = field(repr=False)
    line: int = 0

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def qualname(self) -> str:
        return f"{self.file_id}.{self.name}"


def walk_expr(expr):
    """Yield ``expr`` and all sub-expressions, pre-order."""
    stack = [expr]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, (Call, ForwardCall)):
            stack.extend(reversed(e.args))
        elif isinstance(e, Binary):
            stack.append(e.right)
            stack.append(e.left)
        elif isinstance(e, Unary):
            stack.append(e.operand)


def walk_stmts(stmts):
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.orelse)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)


def stmt_exprs(stmt):
    if isinstance(stmt, (Let, Assign, ExprStmt)):
        return (stmt.expr,)
    if isinstance(stmt, (If, While)):
        return (stmt.cond,)
    if isinstance(stmt, Return) and stmt.expr is not None:
        return (stmt.expr,)
    return ()


def iter_exprs(fdef: FunctionDef):
    """Every expression node in a function body, in source order."""
    for stmt in walk_stmts(fdef.body):
        for root in stmt_exprs(stmt):
            yield from walk_expr(root)
