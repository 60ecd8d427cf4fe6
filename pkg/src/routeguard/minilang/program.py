"""Whole-program view: parsing a set of files, resolving calls, the function registry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from ..errors import ParseError, ResolveError
from .nodes import LITERALS, Call, ForwardCall, FunctionDef, iter_exprs
from .parser import BUILTINS, parse_file


@dataclass(frozen=True)
class CallSite:
    caller_file: str
    caller_fn: str
    callee_file: str
    callee_name: str
    args: tuple  # Expr nodes; literals are IntLit/StrLit/BoolLit
    span: tuple[int, int]
    line: int
    qualifier: Optional[str]

    @property
    def cross_file(self) -> bool:
        return self.caller_file != self.callee_file

    @property
    def target(self) -> str:
        return f"{self.callee_file}.{self.callee_name}"

    @property
    def literal_args(self) -> list:
        return [a for a in self.args if isinstance(a, LITERALS)]


class FunctionRegistry:
    """Total map ``(file_id, name, arity) -> FunctionDef``."""

    def __init__(self, functions: Iterable[FunctionDef]):
        self._table: dict[tuple[str, str, int], FunctionDef] = {}
        self._modules: dict[str, str] = {}
        for f in functions:
            key = (f.file_id, f.name, f.arity)
            if key in self._table:
                raise ResolveError(f"duplicate definition of {f.qualname}/{f.arity}")
            self._table[key] = f
            self._modules[f.file_id.lower()] = f.file_id

    def add_module(self, file_id: str) -> None:
        self._modules.setdefault(file_id.lower(), file_id)

    def lookup(self, file_id: str, name: str, arity: int) -> Optional[FunctionDef]:
        return self._table.get((file_id, name, arity))

    def module(self, qualifier: str) -> Optional[str]:
        """Map a call qualifier (``Util``) to a file id (``util``); case-insensitive."""
        return self._modules.get(qualifier.lower())

    def __len__(self) -> int:
        return len(self._table)

    def __iter__(self):
        return iter(self._table.values())

    def __contains__(self, key) -> bool:
        return key in self._table


@dataclass(frozen=True)
class Program:
    files: tuple
    functions: tuple
    entry: tuple[str, str]
    call_sites: tuple
    registry: FunctionRegistry

    def function(self, file_id: str, name: str, arity: int = 0) -> FunctionDef:
        f = self.registry.lookup(file_id, name, arity)
        if f is None:
            raise KeyError((file_id, name, arity))
        return f

    @property
    def forward_calls(self) -> list[tuple[str, ForwardCall]]:
        out = []
        for f in self.functions:
            out.extend((f.file_id, e) for e in iter_exprs(f) if isinstance(e, ForwardCall))
        return out

    def file(self, file_id: str):
        for sf in self.files:
            if sf.file_id == file_id:
                return sf
        raise KeyError(file_id)


def parse(files, entry: str | tuple[str, str] | None = None) -> Program:
    """Parse and resolve a multi-file program.

    ``entry`` is ``"file.fn"`` or a tuple; by default the first zero-argument
    ``main`` found in file order.
    """
    files = tuple(files)
    seen: dict[str, str] = {}
    for sf in files:
        low = sf.file_id.lower()
        if low in seen:
            raise ParseError(f"file id {sf.file_id!r} clashes with {seen[low]!r}", sf.path)
        seen[low] = sf.file_id

    functions: list[FunctionDef] = []
    for sf in files:
        functions.extend(parse_file(sf.text, sf.file_id, sf.path))
    registry = FunctionRegistry(functions)
    for sf in files:
        registry.add_module(sf.file_id)

    sites = []
    for f in functions:
        for e in iter_exprs(f):
            if not isinstance(e, Call):
                continue
            sites.append(_resolve(f, e, registry))
    call_sites = tuple(s for s in sites if s is not None)

    program = Program(files, tuple(functions), _entry(entry, files, registry), call_sites, registry)
    return program


def _resolve(caller: FunctionDef, call: Call, registry: FunctionRegistry) -> Optional[CallSite]:
    arity = len(call.args)
    where = f"{caller.file_id}:{call.line}"
    if call.qualifier is None:
        if call.name in BUILTINS:
            if BUILTINS[call.name] != arity:
                raise ResolveError(f"{where}: {call.name} takes {BUILTINS[call.name]} argument(s)")
            return None
        callee_file = caller.file_id
    else:
        callee_file = registry.module(call.qualifier)
        if callee_file is None:
            raise ResolveError(f"{where}: unknown module {call.qualifier!r}")
    if registry.lookup(callee_file, call.name, arity) is None:
        raise ResolveError(f"{where}: no function {callee_file}.{call.name} taking {arity} argument(s)")
    return CallSite(
        caller.file_id,
        caller.name,
        callee_file,
        call.name,
        call.args,
        (call.start, call.end),
        call.line,
        call.qualifier,
    )


def _entry(entry, files, registry: FunctionRegistry) -> tuple[str, str]:
    if entry is None:
        for sf in files:
            if registry.lookup(sf.file_id, "main", 0) is not None:
                return (sf.file_id, "main")
        raise ResolveError("no zero-argument main function")
    if isinstance(entry, str):
        file_id, _, name = entry.partition(".")
        entry = (registry.module(file_id) or file_id, name)
    if registry.lookup(entry[0], entry[1], 0) is None:
        raise ResolveError(f"entry {entry[0]}.{entry[1]} is not a zero-argument function")
    return tuple(entry)
