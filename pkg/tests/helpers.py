"""Shared test plumbing: fixture loading, protection, and source mutators."""

from __future__ import annotations

import random
from dataclasses import replace
from functools import lru_cache
from pathlib import Path

from routeguard.canon import SourceFile
from routeguard.cli import run_protected
from routeguard.cryptobox import seeded_source
from routeguard.manifest import load_manifest
from routeguard.minilang import parse, run
from routeguard.minilang.lexer import tokenize
from routeguard.protector import protect

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
FIXTURE_NAMES = ("fib", "keepass", "cyclic", "diamond", "lint3", "shapes", "wide")

_OP_SWAP = {
    "+": "-", "-": "+", "*": "/", "/": "*", "%": "*", "<": ">", ">": "<",
    "<=": ">=", ">=": "<=", "==": "!=", "!=": "==", "&&": "||", "||": "&&",
    "=": "==", "!": "-", "(": ")", ")": "(", "{": "}", "}": "{", ",": ";",
    ";": ",", ":": ".", ".": ":", "->": "=",
}


def manifest(name: str):
    return load_manifest(FIXTURES / name / "manifest.toml")


def program(name: str):
    return manifest(name).program()


@lru_cache(maxsize=None)
def protected(name: str, seed: int = 7):
    m = manifest(name)
    return protect(m.program(), m.selects, seeded_source(seed))


def plain_output(name: str) -> list[str]:
    report = run(program(name), None)
    assert report.error is None, report.error
    return report.output


def run_files(config, files):
    return run_protected(config, files)


def mutate_token(text: str, tok) -> str:
    """Replace one token by a different lexeme of the same kind."""
    if tok.kind == "int":
        new = str(int(tok.text) + 1)
    elif tok.kind == "ident":
        new = tok.text + "_"
    elif tok.kind == "str":
        new = tok.text[:-1] + 'x"'
    else:
        new = _OP_SWAP[tok.text]
    return text[: tok.start] + new + text[tok.end:]


def token_mutants(sf: SourceFile):
    """Yield ``(token, mutated SourceFile)`` for every token of ``sf``."""
    for tok in tokenize(sf.text, sf.path):
        if tok.kind == "eof":
            continue
        yield tok, replace(sf, text=mutate_token(sf.text, tok))


def layout_mutant(sf: SourceFile, rng: random.Random) -> SourceFile:
    """Insert a comment or extra whitespace at a random token boundary."""
    toks = [t for t in tokenize(sf.text, sf.path) if t.kind != "eof"]
    boundary = rng.choice([0] + [t.end for t in toks])
    filler = rng.choice([
        " ", "\n\n", "\t", "   \n  ",
        f"// note {rng.randrange(10**6)}\n",
        "\n// fn fake() { return 1; }\n",
    ])
    return replace(sf, text=sf.text[:boundary] + filler + sf.text[boundary:])


def with_file(files, new: SourceFile):
    return [new if f.file_id == new.file_id else f for f in files]


def reparse(files, entry):
    return parse(files, entry)
