import hashlib
import random

import pytest
from hypothesis import given, strategies as st

from helpers import program, protected
from oracles import brute_closed_hash
from routeguard.closedhash import ZERO, KeyNonce, callee_callers, closed_hashes, derive_key, xor
from routeguard.depgraph import DependencyGraph, break_cycles, build_graph
from routeguard.errors import MissingHash, NoCallers


def h(tag):
    return hashlib.sha256(tag.encode()).digest()


def x(*ds):
    out = bytearray(32)
    for d in ds:
        for i, b in enumerate(d):
            out[i] ^= b
    return bytes(out)


def dag(nodes, arcs):
    return DependencyGraph(frozenset(nodes), frozenset(arcs))


def test_leaf_keeps_plain_hash():
    t = closed_hashes(dag(["k"], []), {"k": h("K")})
    assert t["k"] == h("K")


def test_chain():
    A, B, C = h("A"), h("B"), h("C")
    t = closed_hashes(dag("abc", {("a", "b"), ("b", "c")}), {"a": A, "b": B, "c": C})
    assert t["c"] == C and t["b"] == x(B, C) and t["a"] == x(A, B, C)


def test_diamond_cancels_shared_dependency():
    A, B, C, D = (h(s) for s in "ABCD")
    t = closed_hashes(
        dag("abcd", {("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")}),
        {"a": A, "b": B, "c": C, "d": D},
    )
    assert t["a"] == x(A, x(B, D), x(C, D)) == x(A, B, C)


def test_diamond_fixture_cancellation():
    # main reaches base three times (via left, via right, directly): two copies cancel
    pp = protected("diamond")
    closed = pp.config.closed_hashes
    M, L, R, B = (_plain(pp, f) for f in ("main", "left", "right", "base"))
    assert closed["left"] == x(L, B)
    assert closed["main"] == x(M, x(L, B), x(R, B), B) == x(M, L, R, B)


def _plain(pp, file_id):
    from routeguard.canon import file_hash

    return file_hash(next(f for f in pp.files if f.file_id == file_id))


def test_removed_arcs_do_not_propagate():
    graph = DependencyGraph(frozenset("ab"), frozenset({("a", "b")}), frozenset({("b", "a")}))
    t = closed_hashes(graph, {"a": h("A"), "b": h("B")})
    assert t["b"] == h("B")


def test_missing_plain_hash():
    with pytest.raises(MissingHash):
        closed_hashes(dag("ab", {("a", "b")}), {"a": h("A")})


def test_xor_of_nothing_is_zero():
    assert xor() == ZERO


@st.composite
def dags_with_hashes(draw):
    n = draw(st.integers(1, 8))
    names = [f"f{i}" for i in range(n)]
    arcs = {(names[i], names[j]) for i in range(n) for j in range(i + 1, n) if draw(st.booleans())}
    plain = {nm: draw(st.binary(min_size=32, max_size=32)) for nm in names}
    return dag(names, arcs), plain


@given(dags_with_hashes())
def test_matches_brute_force(case):
    graph, plain = case
    table = closed_hashes(graph, plain)
    for node in graph.nodes:
        assert table[node] == brute_closed_hash(node, graph.arcs, plain)


def test_single_caller_key():
    H, N = h("H"), h("N")
    t = closed_hashes(dag("ab", {("a", "b")}), {"a": H, "b": h("B")})
    assert derive_key("b", {"a"}, t, KeyNonce("b", N)) == x(t["a"], N)


def test_two_callers_order_independent():
    plain = {"a": h("1"), "c": h("2"), "b": h("3")}
    t = closed_hashes(dag("abc", {("a", "b"), ("c", "b")}), plain)
    n = KeyNonce("b", h("N"))
    k1 = derive_key("b", ["a", "c"], t, n)
    k2 = derive_key("b", ["c", "a"], t, n)
    assert k1 == k2 == x(t["a"], t["c"], h("N"))


def test_no_callers():
    t = closed_hashes(dag("a", []), {"a": h("A")})
    with pytest.raises(NoCallers):
        derive_key("a", set(), t, KeyNonce("a", h("N")))


def test_nonce_must_match_callee():
    t = closed_hashes(dag("ab", {("a", "b")}), {"a": h("A"), "b": h("B")})
    with pytest.raises(ValueError):
        derive_key("b", {"a"}, t, KeyNonce("a", h("N")))


def test_nonce_length_checked():
    with pytest.raises(ValueError):
        KeyNonce("a", bytes(16))


def test_callee_callers_include_removed_arcs():
    graph = break_cycles(build_graph(program("cyclic")))
    assert callee_callers(graph) == {"even": {"main", "odd"}, "odd": {"main", "even"}}


def test_caller_bit_flip_changes_key():
    rng = random.Random(3)
    graph = dag("abc", {("a", "c"), ("b", "c")})
    plain = {n: h(n) for n in "abc"}
    nonce = KeyNonce("c", h("N"))
    base = derive_key("c", {"a", "b"}, closed_hashes(graph, plain), nonce)
    for _ in range(64):
        who = rng.choice("ab")
        flipped = bytearray(plain[who])
        flipped[rng.randrange(32)] ^= 1 << rng.randrange(8)
        changed = dict(plain, **{who: bytes(flipped)})
        assert derive_key("c", {"a", "b"}, closed_hashes(graph, changed), nonce) != base
