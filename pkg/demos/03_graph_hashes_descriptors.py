# The pieces underneath: dependency graph, closed hashes, and descriptors.
#
# Run from the repository root:  python3 demos/03_graph_hashes_descriptors.py

from pathlib import Path

from routeguard.canon import file_hash
from routeguard.closedhash import callee_callers, closed_hashes
from routeguard.depgraph import break_cycles, build_graph, topo_sort
from routeguard.manifest import load_manifest
from routeguard.rewriter import (
    CallDescriptor,
    decode_descriptor,
    encode_descriptor,
    lint_return_types,
)

ROOT = Path(__file__).resolve().parent.parent

# even.ml and odd.ml call each other, so the file graph has a cycle.
# A depth-first pass in file-id order drops the back edge. The residual graph
# can be sorted.

program = load_manifest(ROOT / "fixtures" / "cyclic" / "manifest.toml").program()
dag = break_cycles(build_graph(program))
print(dag.to_text())
print("dependencies first:", topo_sort(dag))

# A closed hash covers a file and everything it depends on. The dropped arc
# still counts as a caller when keys are derived.

table = closed_hashes(dag, {sf.file_id: file_hash(sf) for sf in program.files})
for node in topo_sort(dag):
    print(f"{node:5} plain {table.plain[node].hex()[:16]}  closed {table[node].hex()[:16]}")
print("callers per callee:", {k: sorted(v) for k, v in sorted(callee_callers(dag).items())})

# The descriptor wire format joins four fields with '-'. Empty lists are written
# as null. Literal values are percent-escaped so hyphens and commas stay safe.

d = CallDescriptor("Store", "put", ("Str", "Int"), ("a-b,c", "-3"))
wire = encode_descriptor(d)
print(wire)
print("round trip:", decode_descriptor(wire) == d)
print(encode_descriptor(CallDescriptor("Util", "fib")))

# The lint pass flags callees whose return type appears only once in the
# project. Those types make a routed call easier to link back to its target.

m = load_manifest(ROOT / "fixtures" / "lint3" / "manifest.toml")
for w in lint_return_types(m.program(), m.selects):
    print(w)
