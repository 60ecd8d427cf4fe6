"""File dependency graph: extraction, deterministic cycle breaking, topological order.

An arc ``(a, b)`` means some function in file ``a`` calls a function defined
in file ``b`` (``a`` depends on ``b``). Self-dependencies are never arcs, and
``forward_call`` expressions are router references, not dependencies.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

from .errors import CycleError

Arc = tuple[str, str]


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset[str]
    arcs: frozenset[Arc]
    removed_arcs: frozenset[Arc] = field(default_factory=frozenset)

    def successors(self, node: str) -> list[str]:
        return sorted(b for a, b in self.arcs if a == node)

    def callers(self, node: str, *, include_removed: bool = True) -> set[str]:
        arcs = self.arcs | self.removed_arcs if include_removed else self.arcs
        return {a for a, b in arcs if b == node}

    @property
    def all_arcs(self) -> frozenset[Arc]:
        return self.arcs | self.removed_arcs

    def to_text(self) -> str:
        """Adjacency list, one ``file: dep1,dep2`` line per node, then removed arcs."""
        lines = [f"{n}: {','.join(self.successors(n))}".rstrip() for n in sorted(self.nodes)]
        lines.append("removed:")
        lines.extend(f"{a} -> {b}" for a, b in sorted(self.removed_arcs))
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        lines = ["digraph dependencies {"]
        lines.extend(f'  "{n}";' for n in sorted(self.nodes))
        lines.extend(f'  "{a}" -> "{b}";' for a, b in sorted(self.arcs))
        lines.extend(f'  "{a}" -> "{b}" [style=dashed, label="removed"];' for a, b in sorted(self.removed_arcs))
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_graph(program) -> DependencyGraph:
    nodes = frozenset(sf.file_id for sf in program.files)
    arcs = frozenset(
        (site.caller_file, site.callee_file) for site in program.call_sites if site.cross_file
    )
    return DependencyGraph(nodes, arcs)


def break_cycles(g: DependencyGraph) -> DependencyGraph:
    """Drop every back edge of a lexicographic depth-first traversal.

    Roots are tried in ascending file id order and successors are visited in
    ascending order; an arc into a node still on the DFS stack is a back edge.
    """
    adjacency = {n: g.successors(n) for n in g.nodes}
    state: dict[str, int] = {}  # 1 = on stack, 2 = finished
    back: set[Arc] = set()
    for root in sorted(g.nodes):
        if root in state:
            continue
        state[root] = 1
        stack = [(root, iter(adjacency[root]))]
        while stack:
            node, it = stack[-1]
            for succ in it:
                s = state.get(succ)
                if s == 1:
                    back.add((node, succ))
                elif s is None:
                    state[succ] = 1
                    stack.append((succ, iter(adjacency[succ])))
                    break
            else:
                state[node] = 2
                stack.pop()
    if not back:
        return g
    return replace(g, arcs=g.arcs - back, removed_arcs=g.removed_arcs | back)


def topo_sort(g: DependencyGraph) -> list[str]:
    """Dependencies first; ties broken by ascending file id (Kahn with a min-heap)."""
    pending = {n: 0 for n in g.nodes}
    dependents: dict[str, list[str]] = {n: [] for n in g.nodes}
    for a, b in g.arcs:
        pending[a] += 1
        dependents[b].append(a)
    ready = [n for n, k in pending.items() if k == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for d in dependents[n]:
            pending[d] -= 1
            if pending[d] == 0:
                heapq.heappush(ready, d)
    if len(order) != len(g.nodes):
        stuck = sorted(n for n, k in pending.items() if k)
        raise CycleError(f"cycle among {', '.join(stuck)}")
    return order
