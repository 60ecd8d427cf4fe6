"""Deterministic canonical form of minilang sources, and its plain hash.

Both protect time and run time hash the canonical bytes, never the raw
text, so comments, indentation, blank lines and line endings carry no
weight. The first argument of every ``forward_call`` is masked with a
fixed placeholder: the sealed envelope placed there is derived from the
hashes themselves and cannot be part of their input.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .errors import LexError
from .minilang.lexer import tokenize

PLACEHOLDER = '"<ENC>"'
FORWARD_CALL = "forward_call"


@dataclass(frozen=True)
class SourceFile:
    file_id: str
    path: str
    text: str

    @classmethod
    def load(cls, path: str | Path, root: str | Path | None = None) -> "SourceFile":
        path = Path(path)
        raw = path.read_bytes()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LexError(f"not valid UTF-8 ({exc.reason})", str(path)) from None
        rel = path.relative_to(root).as_posix() if root is not None else path.name
        return cls(path.stem, rel, text)


@dataclass(frozen=True)
class CanonicalForm:
    bytes: bytes
    placeholder_count: int = 0

    def render(self) -> str:
        return self.bytes.decode("utf-8")


def canonicalize(file: SourceFile) -> CanonicalForm:
    """Single-space-joined token stream plus a final LF.

    A file without tokens canonicalizes to the empty byte string.
    """
    tokens = tokenize(file.text, file.path)
    parts = [t.text for t in tokens[:-1]]
    masked = 0
    for i in range(len(parts) - 2):
        if (
            parts[i] == FORWARD_CALL
            and tokens[i].kind == "ident"
            and parts[i + 1] == "("
            and tokens[i + 2].kind == "str"
        ):
            parts[i + 2] = PLACEHOLDER
            masked += 1
    if not parts:
        return CanonicalForm(b"", 0)
    return CanonicalForm((" ".join(parts) + "\n").encode("utf-8"), masked)


def render(form: CanonicalForm) -> SourceFile:
    """Wrap canonical bytes back into a source file (for idempotence checks)."""
    return SourceFile("canonical", "<canonical>", form.render())


def plain_hash(form: CanonicalForm) -> bytes:
    return hashlib.sha256(form.bytes).digest()


def file_hash(file: SourceFile) -> bytes:
    return plain_hash(canonicalize(file))
