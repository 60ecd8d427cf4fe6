"""The protection pipeline and the router config it emits.

Config text (``router.cfg``), one record per line, ``#`` starts a comment::

    version 1
    entry main.main
    file <file_id> hash=<base64 32B closed hash>      (all files, sorted)
    nonce <file_id> iv=<base64 32B key nonce>         (callees only, sorted)
    dep <caller> -> <callee>                          (residual DAG, sorted)
    removed <caller> -> <callee>                      (cycle-broken arcs, sorted)
"""

from __future__ import annotations

import base64
import binascii
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import cryptobox
from .canon import FORWARD_CALL, SourceFile, canonicalize, plain_hash
from .closedhash import DIGEST_SIZE, KeyNonce, callee_callers, closed_hashes, derive_key
from .depgraph import break_cycles, build_graph
from .errors import ConfigError, RouteguardError
from .minilang.lexer import quote, tokenize
from .minilang.program import Program
from .rewriter import Selection, all_cross_file, decode_descriptor, rewrite_calls

FORMAT_VERSION = 1
CONFIG_NAME = "router.cfg"
SOURCE_SUFFIX = ".ml"


class ConfigConflict(RouteguardError):
    pass


@dataclass
class RouterConfig:
    closed_hashes: dict[str, bytes] = field(default_factory=dict)
    nonces: dict[str, bytes] = field(default_factory=dict)
    deps: frozenset = frozenset()
    removed: frozenset = frozenset()
    entry: Optional[str] = None
    format_version: int = FORMAT_VERSION

    @property
    def files(self) -> list[str]:
        return sorted(self.closed_hashes)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def emit_config(config: RouterConfig) -> str:
    lines = [f"version {config.format_version}"]
    if config.entry:
        lines.append(f"entry {config.entry}")
    lines += [f"file {f} hash={_b64(config.closed_hashes[f])}" for f in sorted(config.closed_hashes)]
    lines += [f"nonce {f} iv={_b64(config.nonces[f])}" for f in sorted(config.nonces)]
    lines += [f"dep {a} -> {b}" for a, b in sorted(config.deps)]
    lines += [f"removed {a} -> {b}" for a, b in sorted(config.removed)]
    return "\n".join(lines) + "\n"


_NAME = r"[^\s#]+"
_RECORD = {
    "version": re.compile(r"version (\d+)"),
    "entry": re.compile(rf"entry ({_NAME})\.({_NAME})"),
    "file": re.compile(rf"file ({_NAME}) hash=(\S+)"),
    "nonce": re.compile(rf"nonce ({_NAME}) iv=(\S+)"),
    "dep": re.compile(rf"dep ({_NAME}) -> ({_NAME})"),
    "removed": re.compile(rf"removed ({_NAME}) -> ({_NAME})"),
}


def _digest(text: str, lineno: int) -> bytes:
    try:
        raw = base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError):
        raise ConfigError(f"line {lineno}: bad Base-64") from None
    if len(raw) != DIGEST_SIZE:
        raise ConfigError(f"line {lineno}: expected {DIGEST_SIZE} bytes, got {len(raw)}")
    return raw


def parse_config(text: str) -> RouterConfig:
    cfg = RouterConfig(format_version=0)
    deps, removed = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split(" ", 1)[0]
        rx = _RECORD.get(word)
        m = rx.fullmatch(line) if rx else None
        if m is None:
            raise ConfigError(f"line {lineno}: cannot parse {raw!r}")
        if word == "version":
            cfg.format_version = int(m.group(1))
        elif word == "entry":
            cfg.entry = f"{m.group(1)}.{m.group(2)}"
        elif word == "file":
            if m.group(1) in cfg.closed_hashes:
                raise ConfigError(f"line {lineno}: duplicate file {m.group(1)}")
            cfg.closed_hashes[m.group(1)] = _digest(m.group(2), lineno)
        elif word == "nonce":
            if m.group(1) in cfg.nonces:
                raise ConfigError(f"line {lineno}: duplicate nonce {m.group(1)}")
            cfg.nonces[m.group(1)] = _digest(m.group(2), lineno)
        elif word == "dep":
            deps.add((m.group(1), m.group(2)))
        else:
            removed.add((m.group(1), m.group(2)))
    if cfg.format_version != FORMAT_VERSION:
        raise ConfigError(f"unsupported or missing version (got {cfg.format_version})")
    cfg.deps, cfg.removed = frozenset(deps), frozenset(removed)
    known = set(cfg.closed_hashes)
    for a, b in sorted(deps | removed):
        if a not in known or b not in known:
            raise ConfigError(f"arc {a} -> {b} names an undeclared file")
        if a == b:
            raise ConfigError(f"self-dependency {a}")
    for f in sorted(cfg.nonces):
        if f not in known:
            raise ConfigError(f"nonce for undeclared file {f}")
    return cfg


@dataclass
class ProtectedProject:
    files: list[SourceFile]
    config: RouterConfig
    entry: str
    descriptor_count: int = 0

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for sf in self.files:
            p = out / f"{sf.file_id}{SOURCE_SUFFIX}"
            p.write_bytes(sf.text.encode("utf-8"))
            written.append(p)
        cfg = out / CONFIG_NAME
        cfg.write_text(emit_config(self.config), encoding="utf-8")
        written.append(cfg)
        return written

    def serialize(self) -> bytes:
        """All emitted bytes, in write order."""
        parts = [sf.text.encode("utf-8") for sf in self.files]
        parts.append(emit_config(self.config).encode("utf-8"))
        return b"".join(parts)


def load_protected(directory: str | Path) -> tuple[RouterConfig, list[SourceFile]]:
    """Read ``router.cfg`` and whichever of its listed sources exist."""
    d = Path(directory)
    cfg_path = d / CONFIG_NAME
    if not cfg_path.is_file():
        raise ConfigError(f"{cfg_path} not found")
    config = parse_config(cfg_path.read_text(encoding="utf-8"))
    files = []
    for file_id in config.files:
        p = d / f"{file_id}{SOURCE_SUFFIX}"
        if p.is_file():
            files.append(SourceFile.load(p, d))
    return config, files


def _seal_sources(files, program: Program, keys, source) -> tuple[list[SourceFile], int]:
    """Swap each plaintext ``forward_call`` descriptor for its sealed envelope."""
    sealed_files, count = [], 0
    for sf in files:
        toks = tokenize(sf.text, sf.path)
        edits = []
        for i in range(len(toks) - 2):
            t = toks[i]
            if t.kind == "ident" and t.text == FORWARD_CALL and toks[i + 1].text == "(" and toks[i + 2].kind == "str":
                lit = toks[i + 2]
                desc = decode_descriptor(lit.value)
                callee = program.registry.module(desc.dst_file)
                if callee not in keys:
                    raise ConfigConflict(f"{sf.file_id}: no key for callee {desc.dst_file}")
                env = cryptobox.seal(keys[callee], lit.value.encode("utf-8"), source=source)
                edits.append((lit.start, lit.end, quote(env.encode())))
        text = sf.text
        for start, end, new in reversed(edits):
            text = text[:start] + new + text[end:]
        count += len(edits)
        sealed_files.append(SourceFile(sf.file_id, sf.path, text))
    return sealed_files, count


def protect(
    program: Program,
    selection: Selection = all_cross_file,
    rng: Optional[cryptobox.RandomSource] = None,
    *,
    hint: bool = False,
) -> ProtectedProject:
    """Rewrite, hash, derive keys, seal, and assemble the router config.

    ``rng`` supplies every random byte (key nonces, CBC IVs); leave it None
    for the OS source.
    """
    rewritten, pairs = rewrite_calls(program, selection, hint=hint)
    plain = {sf.file_id: plain_hash(canonicalize(sf)) for sf in rewritten}

    # dependencies come from the original call structure, router excluded
    dag = break_cycles(build_graph(program))
    table = closed_hashes(dag, plain)
    callers = callee_callers(dag)

    nonces = {callee: cryptobox.gen_nonce(DIGEST_SIZE, rng) for callee in sorted(callers)}
    keys = {
        callee: derive_key(callee, callers[callee], table, KeyNonce(callee, nonces[callee]))
        for callee in sorted(callers)
    }
    try:
        sealed, count = _seal_sources(rewritten, program, keys, rng)
    finally:
        for k in keys.values():
            k[:] = bytes(len(k))

    for sf in sealed:
        if plain_hash(canonicalize(sf)) != plain[sf.file_id]:
            raise ConfigConflict(f"{sf.file_id}: canonical hash moved while sealing")
    if count != len(pairs):
        raise ConfigConflict(f"sealed {count} descriptors, rewrote {len(pairs)} calls")

    entry = f"{program.entry[0]}.{program.entry[1]}"
    config = RouterConfig(
        closed_hashes=dict(table.closed),
        nonces=nonces,
        deps=frozenset(dag.arcs),
        removed=frozenset(dag.removed_arcs),
        entry=entry,
    )
    return ProtectedProject(sealed, config, entry, count)
