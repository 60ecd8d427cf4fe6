"""Closed hashes over the dependency DAG and per-callee key derivation.

A file's closed hash is its plain hash XOR the closed hashes of every file
it depends on; a file with no dependencies keeps its plain hash. The key
protecting calls into file ``j`` is the XOR of the closed hashes of all
files calling into ``j``, XOR a 32-byte random nonce kept in the router
config. Keys themselves are never written anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .depgraph import DependencyGraph, topo_sort
from .errors import MissingHash, NoCallers

DIGEST_SIZE = 32
ZERO = bytes(DIGEST_SIZE)


def xor(*digests: bytes) -> bytes:
    acc = 0
    for d in digests:
        if len(d) != DIGEST_SIZE:
            raise ValueError(f"digest must be {DIGEST_SIZE} bytes, got {len(d)}")
        acc ^= int.from_bytes(d, "big")
    return acc.to_bytes(DIGEST_SIZE, "big")


@dataclass(frozen=True)
class ClosedHashTable:
    closed: Mapping[str, bytes]
    plain: Mapping[str, bytes]

    def __getitem__(self, file_id: str) -> bytes:
        return self.closed[file_id]


@dataclass(frozen=True)
class KeyNonce:
    file_id: str
    nonce: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.nonce) != DIGEST_SIZE:
            raise ValueError(f"key nonce must be {DIGEST_SIZE} bytes")


def closed_hashes(dag: DependencyGraph, plain: Mapping[str, bytes]) -> ClosedHashTable:
    missing = sorted(n for n in dag.nodes if n not in plain)
    if missing:
        raise MissingHash(f"no plain hash for {', '.join(missing)}")
    deps: dict[str, list[str]] = {n: [] for n in dag.nodes}
    for a, b in dag.arcs:
        deps[a].append(b)
    closed: dict[str, bytes] = {}
    for node in topo_sort(dag):
        closed[node] = xor(plain[node], *(closed[d] for d in deps[node]))
    return ClosedHashTable(closed, {n: plain[n] for n in dag.nodes})


def derive_key(
    callee: str,
    callers: Iterable[str],
    table: ClosedHashTable,
    nonce: KeyNonce,
) -> bytearray:
    """XOR of the callers' closed hashes and the callee's nonce.

    Returned as a bytearray so the holder can wipe it in place.
    """
    callers = set(callers)
    if not callers:
        raise NoCallers(f"{callee} has no callers; nothing is sealed under its key")
    if nonce.file_id != callee:
        raise ValueError(f"nonce belongs to {nonce.file_id}, not {callee}")
    return bytearray(xor(nonce.nonce, *(table.closed[c] for c in callers)))


def callee_callers(dag: DependencyGraph) -> dict[str, set[str]]:
    """Callers of every file with at least one, cycle-broken arcs included."""
    out: dict[str, set[str]] = {}
    for a, b in dag.all_arcs:
        out.setdefault(b, set()).add(a)
    return out
