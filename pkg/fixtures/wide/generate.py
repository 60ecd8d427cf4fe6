"""Regenerate main.ml: 200 cross-file call sites, all executed."""

import random
from pathlib import Path

BLOCKS, PER_BLOCK = 4, 50


def call(rng: random.Random) -> str:
    k = rng.randrange(1, 9)
    return rng.choice([
        f"acc = LibA.add(acc, {k});",
        f"acc = LibA.sub(acc, {k});",
        f"acc = LibB.mix({k}, acc);",
        f"acc = LibB.fold(acc);",
        f"tag = LibC.tag(\"w-{k}\", acc);",
    ])


def main() -> None:
    rng = random.Random(200)
    out = ["// Generated by generate.py; 200 cross-file call sites."]
    for b in range(BLOCKS):
        out.append(f"fn block{b}(acc: Int) -> Int {{")
        out.append('    let tag: Str = "";')
        out.extend("    " + call(rng) for _ in range(PER_BLOCK))
        out.append("    print(tag);")
        out.append("    return acc;")
        out.append("}")
        out.append("")
    out.append("fn main() {")
    out.append("    let acc: Int = 1;")
    for b in range(BLOCKS):
        out.append(f"    acc = block{b}(acc);")
        out.append("    print(acc);")
    out.append("}")
    Path(__file__).with_name("main.ml").write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
