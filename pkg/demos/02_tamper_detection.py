# What happens when someone edits a protected project.
#
# Run from the repository root:  python3 demos/02_tamper_detection.py

from dataclasses import replace
from pathlib import Path

from routeguard.canon import canonicalize, file_hash
from routeguard.cli import run_protected
from routeguard.cryptobox import seeded_source
from routeguard.manifest import load_manifest
from routeguard.protector import protect

ROOT = Path(__file__).resolve().parent.parent

manifest = load_manifest(ROOT / "fixtures" / "keepass" / "manifest.toml")
result = protect(manifest.program(), manifest.selects, seeded_source(3))
baseline = run_protected(result.config, result.files)
print("untouched:", baseline.exit_code, baseline.stdout[:3], "...")


def edited(file_id, edit):
    return [replace(sf, text=edit(sf.text)) if sf.file_id == file_id else sf
            for sf in result.files]


# Comments and whitespace do not count. Hashes are taken over the canonical
# token stream, so reformatting leaves them unchanged.

codec = next(sf for sf in result.files if sf.file_id == "codec")
reflowed = replace(codec, text="// reformatted\n" + codec.text.replace(" ", "  "))
print("same canonical hash after reformatting:", file_hash(codec) == file_hash(reflowed))
print("canonical tokens start:", canonicalize(codec).render()[:60], "...")

outcome = run_protected(result.config, edited("codec", lambda t: "// hi\n" + t))
print("comment added:", outcome.exit_code)

# Changing one number in a leaf file changes its hash. It also changes the
# closed hash of every file that depends on it, which the keys are built from.

outcome = run_protected(result.config, edited("mathutil", lambda t: t.replace("1", "2", 1)))
print("constant edited:", outcome.exit_code, outcome.stderr)

# Swapping one sealed descriptor for another one from the same file also fails:
# a descriptor sealed for one callee does not open under another callee's key.

main = next(sf for sf in result.files if sf.file_id == "main").text
blobs = [part.split('"')[1] for part in main.split("forward_call(")[1:]]
swapped = main.replace(blobs[0], "@@").replace(blobs[-1], blobs[0]).replace("@@", blobs[-1])
outcome = run_protected(result.config, edited("main", lambda t: swapped))
print("descriptors swapped:", outcome.exit_code, outcome.stderr)
