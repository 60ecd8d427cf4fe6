"""minilang: a small multi-file language with free functions and cross-file calls.

Syntax overview::

    // util.ml
    fn add(a: Int, b: Int) -> Int { return a + b; }

    // main.ml
    fn main() {
        let x: Int = Util.add(1, 2);   // cross-file call: Module.func(...)
        print(x);
    }

Types are ``Int`` (64-bit signed), ``Str``, ``Bool`` and ``Unit``.
"""

from .interpreter import ExitReport, ExitStatus, Interpreter, run
from .lexer import Token, tokenize
from .nodes import FunctionDef
from .program import CallSite, FunctionRegistry, Program, parse


def registry(program: Program) -> FunctionRegistry:
    return program.registry


__all__ = [
    "CallSite",
    "ExitReport",
    "ExitStatus",
    "FunctionDef",
    "FunctionRegistry",
    "Interpreter",
    "Program",
    "Token",
    "parse",
    "registry",
    "run",
    "tokenize",
]
