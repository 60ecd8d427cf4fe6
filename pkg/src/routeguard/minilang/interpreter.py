"""Tree-walking interpreter.

``forward_call`` expressions are handed to a router object exposing
``forward_call(envelope, args, hint=..., caller=..., target=...)``; the
router calls back into :meth:`Interpreter.call_function` to run the
resolved target.
"""

from __future__ import annotations

import enum
import sys
import threading
from dataclasses import dataclass, field

from ..errors import MinilangRuntimeError, TamperDetected
from .nodes import (
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
from .program import Program

MAX_DEPTH = 4096
INT_MIN, INT_MAX = -(2**63), 2**63 - 1

PY_TYPES = {"Int": int, "Str": str, "Bool": bool, "Unit": type(None)}

_NORMAL = object()  # statement completed without `return`


class ExitStatus(enum.Enum):
    NORMAL = "Normal"
    TAMPER_DETECTED = "TamperDetected"
    RUNTIME_ERROR = "RuntimeError"


@dataclass
class ExitReport:
    output: list[str] = field(default_factory=list)
    status: ExitStatus = ExitStatus.NORMAL
    error: str | None = None


def type_of(value) -> str:
    t = type(value)
    if t is bool:
        return "Bool"
    if t is int:
        return "Int"
    if t is str:
        return "Str"
    if value is None:
        return "Unit"
    raise TypeError(f"not a minilang value: {value!r}")


def format_value(value) -> str:
    if value is True:
        return "true"
    if value is False:
        return "false"
    if value is None:
        return "()"
    return str(value)


class _Frame:
    __slots__ = ("vars", "file_id")

    def __init__(self, vars: dict, file_id: str):
        self.vars = vars
        self.file_id = file_id


class Interpreter:
    def __init__(self, program: Program, router=None, *, max_depth: int = MAX_DEPTH):
        self.program = program
        self.registry = program.registry
        self.router = router
        self.max_depth = max_depth
        self.output: list[str] = []
        self.depth = 0
        self._exec = {
            Let: self._let,
            Assign: self._assign,
            If: self._if,
            While: self._while,
            Return: self._return,
            ExprStmt: self._expr_stmt,
        }
        self._eval = {
            IntLit: self._literal,
            StrLit: self._literal,
            BoolLit: self._literal,
            Var: self._var,
            Unary: self._unary,
            Binary: self._binary,
            Call: self._call,
            ForwardCall: self._forward,
        }

    # -- entry points --------------------------------------------------
    def run(self) -> ExitReport:
        file_id, name = self.program.entry
        entry = self.program.function(file_id, name, 0)
        report = ExitReport(self.output)
        try:
            self.call_function(entry, [])
        except TamperDetected as exc:
            report.status = ExitStatus.TAMPER_DETECTED
            report.error = exc.message
            self.output.append(exc.message)
        except MinilangRuntimeError as exc:
            report.status = ExitStatus.RUNTIME_ERROR
            report.error = str(exc)
        except RecursionError:
            report.status = ExitStatus.RUNTIME_ERROR
            report.error = "host recursion limit exceeded"
        return report

    def call_function(self, fdef: FunctionDef, args):
        params = fdef.params
        if len(args) != len(params):
            raise MinilangRuntimeError(
                f"{fdef.qualname} expects {len(params)} argument(s), got {len(args)}"
            )
        scope = {}
        for (pname, ptype), value in zip(params, args):
            if type(value) is not PY_TYPES[ptype]:
                raise MinilangRuntimeError(
                    f"{fdef.qualname}: parameter {pname} expects {ptype}, got {type_of(value)}"
                )
            scope[pname] = value
        if self.depth >= self.max_depth:
            raise MinilangRuntimeError(f"call depth limit {self.max_depth} exceeded")
        self.depth += 1
        try:
            result = self._block(fdef.body, _Frame(scope, fdef.file_id))
        finally:
            self.depth -= 1
        if result is _NORMAL:
            result = None
        if type(result) is not PY_TYPES[fdef.return_type]:
            raise MinilangRuntimeError(
                f"{fdef.qualname} must return {fdef.return_type}, got {type_of(result)}"
            )
        return result

    # -- statements ----------------------------------------------------
    def _block(self, stmts, frame):
        execs = self._exec
        for stmt in stmts:
            r = execs[type(stmt)](stmt, frame)
            if r is not _NORMAL:
                return r
        return _NORMAL

    def _let(self, stmt: Let, frame):
        value = self._eval[type(stmt.expr)](stmt.expr, frame)
        if stmt.type is not None and type(value) is not PY_TYPES[stmt.type]:
            raise MinilangRuntimeError(
                f"line {stmt.line}: let {stmt.name}: {stmt.type} bound to {type_of(value)}"
            )
        frame.vars[stmt.name] = value
        return _NORMAL

    def _assign(self, stmt: Assign, frame):
        scope = frame.vars
        if stmt.name not in scope:
            raise MinilangRuntimeError(f"line {stmt.line}: assignment to undeclared {stmt.name}")
        value = self._eval[type(stmt.expr)](stmt.expr, frame)
        if type(value) is not type(scope[stmt.name]):
            raise MinilangRuntimeError(
                f"line {stmt.line}: {stmt.name} holds {type_of(scope[stmt.name])}, "
                f"cannot assign {type_of(value)}"
            )
        scope[stmt.name] = value
        return _NORMAL

    def _condition(self, expr, frame, line):
        value = self._eval[type(expr)](expr, frame)
        if type(value) is not bool:
            raise MinilangRuntimeError(f"line {line}: condition must be Bool, got {type_of(value)}")
        return value

    def _if(self, stmt: If, frame):
        if self._condition(stmt.cond, frame, stmt.line):
            return self._block(stmt.then, frame)
        return self._block(stmt.orelse, frame)

    def _while(self, stmt: While, frame):
        while self._condition(stmt.cond, frame, stmt.line):
            r = self._block(stmt.body, frame)
            if r is not _NORMAL:
                return r
        return _NORMAL

    def _return(self, stmt: Return, frame):
        if stmt.expr is None:
            return None
        return self._eval[type(stmt.expr)](stmt.expr, frame)

    def _expr_stmt(self, stmt: ExprStmt, frame):
        self._eval[type(stmt.expr)](stmt.expr, frame)
        return _NORMAL

    # -- expressions ---------------------------------------------------
    def _literal(self, expr, frame):
        return expr.value

    def _var(self, expr: Var, frame):
        try:
            return frame.vars[expr.name]
        except KeyError:
            raise MinilangRuntimeError(f"undefined variable {expr.name}") from None

    def _unary(self, expr: Unary, frame):
        v = self._eval[type(expr.operand)](expr.operand, frame)
        if expr.op == "-":
            if type(v) is not int:
                raise MinilangRuntimeError(f"unary - needs Int, got {type_of(v)}")
            return _checked(-v)
        if type(v) is not bool:
            raise MinilangRuntimeError(f"! needs Bool, got {type_of(v)}")
        return not v

    def _binary(self, expr: Binary, frame):
        op = expr.op
        ev = self._eval
        a = ev[type(expr.left)](expr.left, frame)
        if op == "&&" or op == "||":
            if type(a) is not bool:
                raise MinilangRuntimeError(f"{op} needs Bool operands, got {type_of(a)}")
            if (op == "&&") != a:
                return a
            b = ev[type(expr.right)](expr.right, frame)
            if type(b) is not bool:
                raise MinilangRuntimeError(f"{op} needs Bool operands, got {type_of(b)}")
            return b
        b = ev[type(expr.right)](expr.right, frame)
        ta, tb = type(a), type(b)
        if op == "==":
            return ta is tb and a == b
        if op == "!=":
            return ta is not tb or a != b
        if ta is not tb:
            raise MinilangRuntimeError(f"operands of {op} differ: {type_of(a)} vs {type_of(b)}")
        if ta is str:
            if op == "+":
                return a + b
            if op in _COMPARE:
                return _COMPARE[op](a, b)
            raise MinilangRuntimeError(f"operator {op} not defined on Str")
        if ta is not int:
            raise MinilangRuntimeError(f"operator {op} not defined on {type_of(a)}")
        if op == "+":
            return _checked(a + b)
        if op == "-":
            return _checked(a - b)
        if op == "*":
            return _checked(a * b)
        if op in _COMPARE:
            return _COMPARE[op](a, b)
        if b == 0:
            raise MinilangRuntimeError("division by zero")
        # truncating division, remainder takes the dividend's sign
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        if op == "/":
            return _checked(q)
        return a - q * b

    def _call(self, expr: Call, frame):
        ev = self._eval
        args = [ev[type(a)](a, frame) for a in expr.args]
        if expr.qualifier is None:
            builtin = _BUILTINS.get(expr.name)
            if builtin is not None:
                return builtin(self, args)
            file_id = frame.file_id
        else:
            file_id = self.registry.module(expr.qualifier)
        fdef = self.registry.lookup(file_id, expr.name, len(args))
        if fdef is None:
            raise MinilangRuntimeError(f"unresolved call {expr.name}")
        return self.call_function(fdef, args)

    def _forward(self, expr: ForwardCall, frame):
        if self.router is None:
            raise MinilangRuntimeError(f"line {expr.line}: forward_call without a router")
        ev = self._eval
        args = [ev[type(a)](a, frame) for a in expr.args]
        return self.router.forward_call(
            expr.envelope, args, hint=expr.hint, caller=frame.file_id, target=self
        )


def _checked(v: int) -> int:
    if v < INT_MIN or v > INT_MAX:
        raise MinilangRuntimeError("integer overflow")
    return v


_COMPARE = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _print(interp: Interpreter, args):
    interp.output.append(format_value(args[0]))


def _str(interp: Interpreter, args):
    return format_value(args[0])


def _len(interp: Interpreter, args):
    if type(args[0]) is not str:
        raise MinilangRuntimeError(f"len needs Str, got {type_of(args[0])}")
    return len(args[0])


_BUILTINS = {"print": _print, "str": _str, "len": _len}

# Each minilang call costs a handful of host frames.
_HOST_FRAMES_PER_CALL = 12
_STACK_BYTES = 512 * 1024 * 1024


def run(program: Program, router=None, *, max_depth: int = MAX_DEPTH) -> ExitReport:
    """Interpret ``program`` from its entry function.

    Runs on a helper thread with a large stack so the depth cap, not the
    host, is what bounds recursion.
    """
    interp = Interpreter(program, router, max_depth=max_depth)
    needed = max_depth * _HOST_FRAMES_PER_CALL + 1000
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)
    result: list[ExitReport] = []
    failure: list[BaseException] = []

    def target():
        try:
            result.append(interp.run())
        except BaseException as exc:  # re-raised on the calling thread
            failure.append(exc)

    with _STACK_LOCK:
        old = threading.stack_size(_STACK_BYTES)
        try:
            worker = threading.Thread(target=target, name="minilang")
            worker.start()
        finally:
            threading.stack_size(old)
    worker.join()
    if failure:
        raise failure[0]
    return result[0]


_STACK_LOCK = threading.Lock()
